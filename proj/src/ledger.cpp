#include "demosim/ledger.hpp"

#include <algorithm>
#include <numeric>

namespace demosim {

void EventLedger::begin_step(SimDate date) {
  dates_.push_back(date);
  living_.emplace_back(static_cast<std::size_t>(indexer_.size()));
  pool_.emplace_back(static_cast<std::size_t>(indexer_.size()));
}

void EventLedger::append_step(SimDate date, std::vector<CellEvents> living,
                              std::vector<CellEvents> pool) {
  dates_.push_back(date);
  living_.push_back(std::move(living));
  pool_.push_back(std::move(pool));
}

Snapshot::Snapshot(SimDate d, int eth)
    : date(d),
      ethnic_count(eth),
      living(static_cast<std::size_t>(kSexCount * kAgeCount * eth), 0),
      pool(static_cast<std::size_t>(kSexCount * kAgeCount * eth), 0) {}

std::int64_t Snapshot::living_total() const {
  return std::accumulate(living.begin(), living.end(), std::int64_t{0});
}

std::int64_t Snapshot::pool_total() const {
  return std::accumulate(pool.begin(), pool.end(), std::int64_t{0});
}

std::vector<std::int64_t> Snapshot::banded(bool in_pool) const {
  const CellIndexer idx(ethnic_count);
  std::vector<std::int64_t> out(static_cast<std::size_t>(idx.size()), 0);
  const auto& src = in_pool ? pool : living;
  for (int s = 0; s < kSexCount; ++s)
    for (int age = 0; age < kAgeCount; ++age)
      for (int e = 0; e < ethnic_count; ++e) {
        const EthnicGroup g{static_cast<std::uint8_t>(e)};
        out[static_cast<std::size_t>(idx.index(static_cast<Sex>(s), AgeGroup::of_age(age).index(), g))] +=
            src[index(static_cast<Sex>(s), age, g)];
      }
  return out;
}

Snapshot Snapshot::of(const Population& pop, SimDate date, int ethnic_count) {
  Snapshot snap(date, ethnic_count);
  for (PersonId id : pop.active()) {
    const Person& p = pop[id];
    if (p.residence == Residence::Dead) continue;
    const int age = std::min(age_of(p, date), kMaxAge);
    auto& dst = p.residence == Residence::Living ? snap.living : snap.pool;
    ++dst[snap.index(p.sex, age, p.ethnicity)];
  }
  return snap;
}

}  // namespace demosim
