// Statistics over run outputs: ages, ratios, pyramids, growth accounting,
// sampling error and scenario-parameter sensitivity.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "demosim/core.hpp"
#include "demosim/kernel.hpp"
#include "demosim/ledger.hpp"
#include "demosim/migration.hpp"
#include "demosim/scenario.hpp"

namespace demosim {

/// Conjunction of optional predicates over (sex, age, ethnicity) rows.
struct GroupFilter {
  std::optional<Sex> sex;
  std::optional<AgeRange> ages;
  std::optional<EthnicAggregate> aggregate;
  std::optional<EthnicGroup> ethnicity;
  /// Set when a conjunction had contradictory terms.
  bool contradictory = false;

  bool matches(Sex s, int age, EthnicGroup eth, const EthnicCodebook& book) const;
  GroupFilter operator&(const GroupFilter& other) const;
  /// "all", or terms such as "sex=F;age=15-49;agg=eu-immigrant".
  std::string describe(const EthnicCodebook& book) const;
  static GroupFilter parse(std::string_view text, const EthnicCodebook& book);
};

/// Weighted median of whole-year ages; an even count takes the mean of the
/// two central values. Throws DomainError if nothing matches.
double median_age(const Snapshot& snap, const EthnicCodebook& book, const GroupFilter& filter = {});

/// Living count matching a filter.
std::int64_t head_count(const Snapshot& snap, const EthnicCodebook& book, const GroupFilter& filter = {});

/// Women aged 15-49 plus a fifth of those 50-54, over the whole population.
double reproductive_share(const Snapshot& snap);

/// Males per female.
double sex_ratio(const Snapshot& snap, const EthnicCodebook& book, const GroupFilter& filter = {});

struct DependencyRatios {
  double total = 0;
  double old_age = 0;
};
/// Working age is 15-64 plus a fifth of 65-69; the rest of 65-69 counts as
/// elderly.
DependencyRatios dependency_ratios(const Snapshot& snap);

/// Counts per sex and 5-year band.
using Pyramid = std::array<std::array<std::int64_t, AgeGroup::kCount>, kSexCount>;
Pyramid pyramid(const Snapshot& snap);

struct GrowthDecomposition {
  std::int64_t natural_growth = 0;
  std::int64_t net_migration = 0;
};
/// Living-population events over steps dated in [from, to).
GrowthDecomposition growth_decomposition(const EventLedger& ledger, SimDate from, SimDate to,
                                         EthnicAggregate aggregate, const EthnicCodebook& book);

struct ShareEstimate {
  double mean = 0;
  double std = 0;
};
/// Posterior moments of group shares under a flat Dirichlet prior.
std::vector<ShareEstimate> sampling_error(const std::vector<std::int64_t>& counts);

enum class ScenarioParam { Enl, Ex, Em, Ret };
std::string_view param_name(ScenarioParam p);  // f_enl, f_ex, f_em, f_ret
ScenarioParam parse_param(std::string_view name);
double& param_ref(ScenarioConfig& s, ScenarioParam p);

using ScenarioRunner = std::function<RunResult(const ScenarioConfig&)>;
using OutputSelector = std::function<std::vector<double>(const RunResult&)>;

struct SensitivityReport {
  std::string parameter;
  double base_value = 0;
  double delta = 0;
  /// Central difference unless the lower point would be negative.
  bool forward = false;
  std::vector<double> base;
  std::vector<double> up;
  std::vector<double> down;
  std::vector<double> derivative;
  std::vector<std::string> warnings;
};

/// Derivative by +-5% perturbation of one factor, all runs on the runner's
/// seed. A zero base value uses an absolute step of 0.05 instead.
SensitivityReport sensitivity(const ScenarioRunner& runner, const ScenarioConfig& scenario,
                              ScenarioParam param, const OutputSelector& output, int jobs = 1);

struct JointSensitivity {
  std::vector<double> base;
  std::vector<double> effect_em;
  std::vector<double> effect_ret;
  std::vector<double> effect_joint;
  /// |joint - em - ret| per output element.
  std::vector<double> residual;
};

/// Raises f_em and f_ret by 5% separately and together.
JointSensitivity joint_sensitivity(const ScenarioRunner& runner, const ScenarioConfig& scenario,
                                   const OutputSelector& output, int jobs = 1);

/// Living population at each snapshot, in real persons.
std::vector<double> total_population_series(const RunResult& r);
/// Immigrants into the living population per step for one ethnic group.
std::vector<double> inflow_series(const EventLedger& ledger, EthnicGroup eth, double scale = 1.0);

}  // namespace demosim
