// EU-membership scenarios: time-dependent modifiers of the migration
// schedule, plus the one-off exodus and return waves after Brexit.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demosim/core.hpp"
#include "demosim/migration.hpp"
#include "demosim/random.hpp"

namespace demosim {

struct ScenarioConfig {
  std::string name = "status-quo";
  bool brexit = false;
  SimDate referendum = SimDate::containing(2016, 6);  // 23 June 2016
  SimDate brexit_date = SimDate(2018, 0);              // 1 July 2018
  double f_enl = 1.0;
  double f_ex = 0.0;
  double f_em = 1.0;
  double f_ret = 0.0;
  /// Calendar years [start, start + years) of the enlargement multiplier.
  int enlargement_start = 2020;
  int enlargement_years = 10;
  /// Offset of the wave start from the referendum, and its length, in years.
  int wave_delay_years = 2;
  int wave_years = 2;
  /// Share of British emigration bound for other EU countries.
  double eu_emigration_share = 0.30;

  SimDate wave_start() const { return referendum + wave_delay_years * 4; }
  SimDate wave_end() const { return wave_start() + wave_years * 4; }
  int wave_steps() const { return wave_years * 4; }
  bool in_wave(SimDate d) const { return d >= wave_start() && d < wave_end(); }
  SimDate enlargement_begin() const { return SimDate::containing(enlargement_start, 1); }
  SimDate enlargement_end() const {
    return SimDate::containing(enlargement_start + enlargement_years, 1);
  }

  /// Throws DomainError for negative factors, Brexit fractions above 1 or a
  /// wave cut short by `run_end` (runs ending before the wave starts are fine).
  void validate(SimDate run_end) const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

enum class BuiltinScenario { StatusQuo, SecondEnlargement, Amicable, Depopulation, Radical };

ScenarioConfig builtin_scenario(BuiltinScenario which);
std::vector<ScenarioConfig> builtin_scenarios();
/// status-quo, 2nd-enlargement, amicable, depopulation, radical.
std::optional<ScenarioConfig> find_builtin_scenario(std::string_view slug);

/// Parses key=value lines (# comments allowed). Unspecified keys keep their
/// status-quo defaults; dates are "YYYY-MM-DD".
ScenarioConfig parse_scenario(std::string_view text);
std::string format_scenario(const ScenarioConfig& s);
/// A built-in slug, or else a path to a scenario file.
ScenarioConfig resolve_scenario(const std::string& name_or_file);

/// The rate a migration group migrates at on `date` once the scenario's
/// modifiers are applied to the schedule's baseline.
CohortMigrationRate effective_rate(const MigrationSchedule& schedule, const ScenarioConfig& scenario,
                                   const EthnicCodebook& book, Sex sex, EthnicGroup eth,
                                   int base_band, SimDate date);

/// Wave sizes fixed from the stocks at the wave start.
struct WaveTotals {
  std::int64_t exodus = 0;
  std::int64_t returns = 0;
};

/// Living EU immigrants who arrived on or before the Brexit date.
std::vector<PersonId> exodus_eligible(const Population& pop, const ScenarioConfig& scenario,
                                      const EthnicCodebook& book);
/// Native British members of the emigrant pool.
std::vector<PersonId> returnable(const Population& pop, const EthnicCodebook& book);

WaveTotals freeze_wave_totals(const Population& pop, const ScenarioConfig& scenario,
                              const EthnicCodebook& book);

/// The part of `total` due on wave step `step` (0-based) of `steps`, with
/// the remainder going to the earliest steps.
std::int64_t wave_share(std::int64_t total, int step, int steps);

/// Emigrants for this wave step, latest arrivals first. Throws outside the
/// wave window.
std::vector<PersonId> exodus_plan(const Population& pop, const ScenarioConfig& scenario,
                                  const EthnicCodebook& book, const WaveTotals& totals,
                                  SimDate date);

struct ReturnPlan {
  std::vector<PersonId> persons;
  /// Demanded returns that the pool could not supply.
  std::int64_t shortfall = 0;
};

/// Returnees for this wave step, drawn at random from the pool.
ReturnPlan return_plan(const Population& pop, const ScenarioConfig& scenario,
                       const EthnicCodebook& book, const WaveTotals& totals, SimDate date,
                       RandomStream& rng);

}  // namespace demosim
