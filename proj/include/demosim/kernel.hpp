// The quarterly simulation loop.
//
// Each step at date d runs, in order: deliveries due at d; one pass over
// everyone alive for deaths then conceptions (newborns included); baseline
// migration of the living population; scenario wave orders; then a
// snapshot if the next date is 1 July. The emigrant pool takes part in the
// first two phases only.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "demosim/core.hpp"
#include "demosim/data.hpp"
#include "demosim/fertility.hpp"
#include "demosim/ledger.hpp"
#include "demosim/migration.hpp"
#include "demosim/mortality.hpp"
#include "demosim/scenario.hpp"

namespace demosim {

/// Everything a run needs besides its configuration.
struct Models {
  EthnicCodebook codebook;
  /// Twin and sex-at-birth tables are read directly at each delivery.
  FertilityDataset fertility_data;
  PregnancyHazardModel fertility;
  MortalityCurves mortality;
  MigrationSchedule migration;
  /// Source of the initial population.
  CensusTable census;

  friend bool operator==(const Models&, const Models&) = default;
};

/// Calibrates fertility and mortality; the migration schedule is left at
/// zero (see calibrate_migration).
Models calibrate_vital_models(const Dataset& data);

/// Hex digest of the models' contents, echoed in run manifests.
std::string models_fingerprint(const Models& models);

struct RunConfig {
  SimDate start = SimDate(1991, 0);
  SimDate end = SimDate(2041, 0);
  std::int64_t population_size = 100000;
  std::uint64_t seed = 1;
  /// Absent disables the scenario layer: the schedule is used as is and no
  /// waves are issued.
  std::optional<ScenarioConfig> scenario;
  /// False runs without any migration (used by calibration).
  bool migration = true;

  int steps() const { return end - start; }
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// One exodus step: who was selected and the latest arrival date among the
/// eligible persons who stayed.
struct ExodusRecord {
  SimDate date;
  std::int64_t eligible = 0;
  std::vector<PersonId> selected;
  std::vector<SimDate> selected_arrivals;
  std::optional<SimDate> latest_remaining_arrival;
  /// Persons who moved with a selected mother.
  std::int64_t children = 0;
};

/// Simulated migrants attributed to a decade cohort.
struct CohortFlow {
  std::int64_t immigrants = 0;
  std::int64_t emigrants = 0;
};

struct RunResult {
  RunConfig config;
  double scale_factor = 1.0;
  std::string models_fingerprint;
  EventLedger ledger;
  /// The start date (if 1 July) and every later 1 July up to the end.
  std::vector<Snapshot> snapshots;
  std::vector<ExodusRecord> exodus;
  WaveTotals wave_totals;
  std::int64_t return_shortfall = 0;
  std::map<CohortKey, CohortFlow> cohort_flows;
  std::vector<std::string> warnings;

  const Snapshot* snapshot_at(SimDate d) const;
};

class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void before_step(std::size_t /*step*/, SimDate /*date*/, const Population& /*pop*/) {}
  /// The ledger's last step holds this step's events.
  virtual void after_step(std::size_t /*step*/, SimDate /*date*/, const Population& /*pop*/,
                          const EventLedger& /*ledger*/) {}
};

/// Runs from the initial population allocated from the models' census.
RunResult run(const RunConfig& config, const Models& models, StepObserver* observer = nullptr);
/// Runs from a given population; its scale factor is kept.
RunResult run(const RunConfig& config, const Models& models, Population population,
              StepObserver* observer = nullptr);

}  // namespace demosim
