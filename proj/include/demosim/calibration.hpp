// Census-based migration calibration: simulate without migration, compare
// each decade cohort with the censuses, and turn the gap into a rate.
#pragma once

#include <array>
#include <vector>

#include "demosim/data.hpp"
#include "demosim/kernel.hpp"
#include "demosim/ledger.hpp"
#include "demosim/migration.hpp"

namespace demosim {

struct CohortEstimate {
  CohortKey cohort;
  /// Simulated (rescaled) and census sizes at the decade's start and end.
  double sim_start = 0, census_start = 0, sim_end = 0, census_end = 0;
  double net_migration = 0;
  MigrationLaw law = MigrationLaw::Absolute;
  double k = 0;
  /// Relative was called for but undefined for this cohort, so the
  /// absolute law was used instead.
  bool relative_fallback = false;
};

struct MigrationCalibration {
  MigrationSchedule schedule;
  std::vector<CohortEstimate> cohorts;
  /// Factor applied to the simulated counts to match the first census total.
  double rescale = 1.0;
};

/// Cohort size in a census year: base band b at the decade start, or the
/// same persons ten years on (band b + 2, the oldest merged into 85+).
double census_cohort_size(const CensusTable& census, Sex sex, EthnicGroup eth, int base_band,
                          int decade_start, bool at_end);
/// The same cohort counted in a single-year snapshot.
double snapshot_cohort_size(const Snapshot& snap, Sex sex, EthnicGroup eth, int base_band,
                            int decade_start);

/// Pure estimation step: `sim` holds the migration-free snapshots at
/// 1 July 1991, 2001 and 2011.
MigrationCalibration estimate_schedule(const std::array<Snapshot, 3>& sim, const CensusTable& census,
                                       const EthnicCodebook& book);

/// Runs the migration-free simulation from 1991 to 2011 and estimates the
/// schedule. Throws CalibrationError if a census year is missing.
MigrationCalibration calibrate_migration(const Models& vital, std::int64_t population_size,
                                         std::uint64_t seed);

}  // namespace demosim
