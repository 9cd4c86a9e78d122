// Event counts per step and SAE cell, and single-year population snapshots.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "demosim/core.hpp"

namespace demosim {

/// Highest tracked single-year age; older persons are counted at this age.
inline constexpr int kMaxAge = 110;
inline constexpr int kAgeCount = kMaxAge + 1;

struct CellEvents {
  std::int64_t births = 0;
  std::int64_t deaths = 0;
  std::int64_t immigrants = 0;
  std::int64_t emigrants = 0;

  friend bool operator==(const CellEvents&, const CellEvents&) = default;
};

/// Per-step event counts keyed by the SAE cell at the step's date. The
/// emigrant pool has its own columns: arrivals into the pool count as its
/// immigrants, returns as its emigrants.
class EventLedger {
 public:
  EventLedger() = default;
  explicit EventLedger(int ethnic_count) : indexer_(ethnic_count) {}

  const CellIndexer& indexer() const { return indexer_; }
  void begin_step(SimDate date);

  std::size_t steps() const { return dates_.size(); }
  SimDate date(std::size_t step) const { return dates_[step]; }
  const std::vector<SimDate>& dates() const { return dates_; }

  CellEvents& living(int cell) { return living_.back()[static_cast<std::size_t>(cell)]; }
  CellEvents& pool(int cell) { return pool_.back()[static_cast<std::size_t>(cell)]; }
  const std::vector<CellEvents>& living_events(std::size_t step) const { return living_[step]; }
  const std::vector<CellEvents>& pool_events(std::size_t step) const { return pool_[step]; }

  /// Appends a fully formed step (used when reading serialised ledgers).
  void append_step(SimDate date, std::vector<CellEvents> living, std::vector<CellEvents> pool);

  friend bool operator==(const EventLedger&, const EventLedger&) = default;

 private:
  CellIndexer indexer_{0};
  std::vector<SimDate> dates_;
  std::vector<std::vector<CellEvents>> living_;
  std::vector<std::vector<CellEvents>> pool_;
};

/// Head counts by sex, single-year age (0..kMaxAge) and ethnicity, for the
/// living population and for the emigrant pool, at one date.
struct Snapshot {
  SimDate date;
  int ethnic_count = 0;
  std::vector<std::int64_t> living;
  std::vector<std::int64_t> pool;

  Snapshot() = default;
  Snapshot(SimDate d, int ethnic_count);

  std::size_t index(Sex sex, int age, EthnicGroup eth) const {
    return (static_cast<std::size_t>(sex) * kAgeCount + static_cast<std::size_t>(age)) *
               static_cast<std::size_t>(ethnic_count) +
           eth.code;
  }
  std::int64_t at(Sex sex, int age, EthnicGroup eth, bool in_pool = false) const {
    return (in_pool ? pool : living)[index(sex, age, eth)];
  }
  std::int64_t living_total() const;
  std::int64_t pool_total() const;
  /// Living or pool counts aggregated to SAE cells (CellIndexer order).
  std::vector<std::int64_t> banded(bool in_pool = false) const;

  static Snapshot of(const Population& pop, SimDate date, int ethnic_count);

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

}  // namespace demosim
