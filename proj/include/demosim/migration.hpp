// Net migration by cohort: rate laws, the census-based schedule, migrant
// selection, emigration into the auxiliary pool, and immigrant cloning.
#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "demosim/core.hpp"
#include "demosim/random.hpp"

namespace demosim {

enum class MigrationLaw : std::uint8_t {
  Absolute,  // dn/dt = k
  Relative,  // dn/dt = k n
};
std::string_view law_name(MigrationLaw law);
MigrationLaw parse_law(std::string_view name);

/// Cohorts are tracked by their 5-year band at the start of a census decade.
/// Band 15 merges everyone aged 75 or over, who are all 85+ ten years on.
inline constexpr int kBaseBands = 16;
std::string base_band_label(int base_band);
int parse_base_band(std::string_view label);

inline constexpr int kFirstCensusYear = 1991;
inline constexpr int kLastCensusYear = 2011;
/// Year whose rates are carried forward after the last census.
inline constexpr int kReferenceYear = 2006;
inline constexpr std::array<int, 2> kDecadeStarts{1991, 2001};
inline constexpr double kDecadeYears = 10.0;

struct CohortKey {
  Sex sex = Sex::Female;
  EthnicGroup ethnicity;
  int base_band = 0;
  int decade_start = 1991;
  friend constexpr auto operator<=>(const CohortKey&, const CohortKey&) = default;
};

struct CohortMigrationRate {
  CohortKey cohort;
  MigrationLaw law = MigrationLaw::Absolute;
  /// Real persons per year (Absolute) or per year (Relative).
  double k = 0.0;
  friend bool operator==(const CohortMigrationRate&, const CohortMigrationRate&) = default;
};

/// Ages [lo, hi); hi absent means open-ended.
struct AgeRange {
  int lo = 0;
  std::optional<int> hi;
  bool contains(int age) const { return age >= lo && (!hi || age < *hi); }
  friend bool operator==(const AgeRange&, const AgeRange&) = default;
};

/// Whole years elapsed since 1 July of `decade_start`.
int elapsed_years(int decade_start, SimDate date);
/// Ages of a decade cohort at `date`: its base band shifted by the elapsed years.
AgeRange cohort_age_range(int base_band, int decade_start, SimDate date);
/// Ages of the 2001 cohort in the reference year; these fixed groups carry
/// the reference-year rates after the last census.
AgeRange post_census_age_range(int base_band);

/// Which migration group a person of this age belongs to at `date`, if any.
/// Children born during the current decade (or younger than 5 after the
/// last census) belong to none and only migrate with their mothers.
std::optional<int> migration_base_band(int age, SimDate date);

class MigrationSchedule {
 public:
  MigrationSchedule() = default;
  /// All cohorts of both decades at Absolute, k = 0.
  explicit MigrationSchedule(int ethnic_count);

  int ethnic_count() const { return ethnic_count_; }
  const CohortMigrationRate& rate(const CohortKey& key) const;
  void set(const CohortMigrationRate& rate);
  std::vector<CohortMigrationRate> entries() const;

  /// The schedule's own rate for a group at `date`: the current decade's
  /// cohort rate, or after the last census the 2001-2011 rate of the same
  /// base band.
  CohortMigrationRate baseline(Sex sex, EthnicGroup eth, int base_band, SimDate date) const;

  void save(const std::filesystem::path& file, const EthnicCodebook& book) const;
  static MigrationSchedule load(const std::filesystem::path& file, const EthnicCodebook& book);

  friend bool operator==(const MigrationSchedule&, const MigrationSchedule&) = default;

 private:
  std::size_t slot(const CohortKey& key) const;
  int ethnic_count_ = 0;
  std::vector<CohortMigrationRate> rates_;
};

/// (n'_{y+10} - n'_y) - (n_{y+10} - n_y): census change minus the change a
/// migration-free simulation produced. Positive means net immigration.
double estimate_net_migration(double sim_start, double census_start, double sim_end,
                              double census_end);

/// Native British groups use the relative law for net emigration and the
/// absolute law otherwise; all other groups always use the absolute law.
MigrationLaw select_law(EthnicAggregate aggregate, double net_migration);

/// k = dm/dt (Absolute) or ln(1 + dm/n)/dt (Relative).
double rate_from_delta(double dm, double n, double dt, MigrationLaw law);

/// Expected flow over dt for a group of size n: max(k dt, -n) (Absolute) or
/// n (e^{k dt} - 1) (Relative).
double apply_rate(double k, MigrationLaw law, double n, double dt);

enum class SelectionMode { Random, LIFO };

/// Random: uniform without replacement (a prefix of a random permutation).
/// LIFO: latest immigration date first, ties by descending id; `rng` unused.
std::vector<PersonId> select_migrants(const Population& pop, std::span<const PersonId> members,
                                      std::size_t count, SelectionMode mode, RandomStream& rng);

/// Mother -> children younger than 10 at a date, for co-migration.
class FamilyIndex {
 public:
  FamilyIndex() = default;
  FamilyIndex(const Population& pop, SimDate date);
  std::span<const PersonId> children_of(PersonId mother) const;

 private:
  // Parallel arrays sorted by mother.
  std::vector<PersonId> mothers_;
  std::vector<PersonId> children_;
};

inline constexpr int kCoMigrationAge = 10;

struct Moves {
  std::vector<PersonId> principals;
  /// Children who moved because their mother did.
  std::vector<PersonId> children;
};

/// Moves living persons, and their living children under 10, to the pool.
Moves emigrate(Population& pop, std::span<const PersonId> persons, const FamilyIndex& families);
Moves emigrate(Population& pop, std::span<const PersonId> persons, SimDate date);

/// Moves pool members, and their pooled children under 10, back to the
/// living population, stamping the immigration date.
Moves return_from_pool(Population& pop, std::span<const PersonId> persons,
                       const FamilyIndex& families, SimDate date);

/// Where immigrants of a group are drawn from.
struct MigrantCell {
  Sex sex = Sex::Female;
  EthnicGroup ethnicity;
  AgeRange ages;
};

/// Adds `count` immigrants cloned from templates drawn uniformly (with
/// replacement) from `templates`. Each template's living children under 10
/// are cloned alongside and linked to the cloned mother. With no templates,
/// persons are synthesised with ages uniform in the cell's range.
Moves immigrate(Population& pop, const MigrantCell& cell, std::span<const PersonId> templates,
                std::int64_t count, SimDate date, const FamilyIndex& families, RandomStream& rng);
/// Convenience form drawing templates from the living members of an SAE cell.
Moves immigrate(Population& pop, const SAEKey& cell, std::int64_t count, SimDate date,
                RandomStream& rng);

}  // namespace demosim
