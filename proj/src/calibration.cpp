#include "demosim/calibration.hpp"

#include <cmath>

namespace demosim {

double census_cohort_size(const CensusTable& census, Sex sex, EthnicGroup eth, int base_band,
                          int decade_start, bool at_end) {
  const int year = decade_start + (at_end ? 10 : 0);
  if (!census.has_year(year))
    throw CalibrationError("census " + std::to_string(year) + " missing for cohort " +
                           std::string(sex_code(sex)) + "/" + std::to_string(eth.code) + "/" +
                           base_band_label(base_band) + "/" + std::to_string(decade_start));
  const int first = base_band + (at_end ? 2 : 0);
  const int last = base_band == kBaseBands - 1 ? AgeGroup::kCount - 1 : first;
  double n = 0;
  for (int b = std::min(first, AgeGroup::kCount - 1); b <= last; ++b)
    n += static_cast<double>(census.count(year, SAEKey{sex, AgeGroup(b), eth}));
  return n;
}

double snapshot_cohort_size(const Snapshot& snap, Sex sex, EthnicGroup eth, int base_band,
                            int decade_start) {
  const AgeRange r = cohort_age_range(base_band, decade_start, snap.date);
  double n = 0;
  const int hi = r.hi ? std::min(*r.hi, kAgeCount) : kAgeCount;
  for (int a = std::max(r.lo, 0); a < hi; ++a) n += static_cast<double>(snap.at(sex, a, eth));
  return n;
}

MigrationCalibration estimate_schedule(const std::array<Snapshot, 3>& sim, const CensusTable& census,
                                       const EthnicCodebook& book) {
  for (std::size_t i = 0; i < sim.size(); ++i)
    if (sim[i].date != SimDate(kCensusYears[i], 0))
      throw DomainError("calibration snapshots must be taken on 1 July 1991, 2001 and 2011");
  MigrationCalibration out;
  out.schedule = MigrationSchedule(book.size());
  if (!census.has_year(kFirstCensusYear))
    throw CalibrationError("census " + std::to_string(kFirstCensusYear) + " missing");
  const double sim_total = static_cast<double>(sim[0].living_total());
  if (!(sim_total > 0)) throw CalibrationError("migration-free simulation is empty in 1991");
  out.rescale = static_cast<double>(census.total(kFirstCensusYear)) / sim_total;

  for (std::size_t di = 0; di < kDecadeStarts.size(); ++di) {
    const int decade = kDecadeStarts[di];
    for (int s = 0; s < kSexCount; ++s)
      for (int e = 0; e < book.size(); ++e)
        for (int b = 0; b < kBaseBands; ++b) {
          const Sex sex = static_cast<Sex>(s);
          const EthnicGroup eth{static_cast<std::uint8_t>(e)};
          CohortEstimate est;
          est.cohort = CohortKey{sex, eth, b, decade};
          est.sim_start = out.rescale * snapshot_cohort_size(sim[di], sex, eth, b, decade);
          est.sim_end = out.rescale * snapshot_cohort_size(sim[di + 1], sex, eth, b, decade);
          est.census_start = census_cohort_size(census, sex, eth, b, decade, false);
          est.census_end = census_cohort_size(census, sex, eth, b, decade, true);
          est.net_migration =
              estimate_net_migration(est.sim_start, est.census_start, est.sim_end, est.census_end);
          est.law = select_law(book.aggregate(eth), est.net_migration);
          if (est.law == MigrationLaw::Relative &&
              (est.census_start <= 0 || est.net_migration <= -est.census_start)) {
            est.law = MigrationLaw::Absolute;
            est.relative_fallback = true;
          }
          est.k = rate_from_delta(est.net_migration, est.census_start, kDecadeYears, est.law);
          out.schedule.set(CohortMigrationRate{est.cohort, est.law, est.k});
          out.cohorts.push_back(est);
        }
  }
  return out;
}

MigrationCalibration calibrate_migration(const Models& vital, std::int64_t population_size,
                                         std::uint64_t seed) {
  for (int y : kCensusYears)
    if (!vital.census.has_year(y))
      throw CalibrationError("census " + std::to_string(y) + " missing; migration calibration impossible");
  RunConfig cfg;
  cfg.start = SimDate(kFirstCensusYear, 0);
  cfg.end = SimDate(kLastCensusYear, 0);
  cfg.population_size = population_size;
  cfg.seed = seed;
  cfg.migration = false;
  const RunResult r = run(cfg, vital);
  std::array<Snapshot, 3> snaps;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const Snapshot* s = r.snapshot_at(SimDate(kCensusYears[i], 0));
    if (!s) throw CalibrationError("migration-free run lacks a census-date snapshot");
    snaps[i] = *s;
  }
  return estimate_schedule(snaps, vital.census, vital.codebook);
}

}  // namespace demosim
