// Run outputs and calibrated model directories on disk.
//
// A run directory holds snapshots.csv (5-year bands), age_snapshots.csv
// (single years, used for medians), events.csv and pool_events.csv,
// exodus.csv and manifest.json. A models directory holds a copy of the
// dataset under data/ plus the calibrated tables.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "demosim/calibration.hpp"
#include "demosim/kernel.hpp"

namespace demosim {

inline constexpr std::string_view kVersion = "1.0.0";

void write_run(const RunResult& result, const EthnicCodebook& book, const std::filesystem::path& dir);

struct LoadedRun {
  std::filesystem::path dir;
  EthnicCodebook codebook;
  std::string scenario;
  std::uint64_t seed = 0;
  double scale_factor = 1.0;
  std::vector<Snapshot> snapshots;
  EventLedger ledger;
  /// manifest.json as text.
  std::string manifest;

  const Snapshot* snapshot_at(SimDate d) const;
};

/// Throws DataError if files are missing or malformed. The codebook comes
/// from the manifest.
LoadedRun read_run(const std::filesystem::path& dir);

struct CalibrationInfo {
  std::int64_t population_size = 0;
  std::uint64_t seed = 0;
};

void save_models(const Models& models, const Dataset& data, const MigrationCalibration& migration,
                 const CalibrationInfo& info, const std::filesystem::path& dir);
/// Reloads the dataset copy, recalibrates the (deterministic) vital models
/// and reads the migration schedule as stored, so hand edits to it apply.
Models load_models(const std::filesystem::path& dir);

}  // namespace demosim
