#include <gtest/gtest.h>

#include "../common/census.hpp"
#include "demosim/calibration.hpp"
#include "support.hpp"

using namespace demosim;
using demosim::testing::census_from_run;
using demosim::testing::vital_models;

namespace {

constexpr std::int64_t kSize = 5000;

// Snapshots and a census cut from one migration-free run.
struct SelfCensus {
  std::array<Snapshot, 3> snaps;
  CensusTable census;
};

const SelfCensus& self_census() {
  static const SelfCensus sc = [] {
    RunConfig c;
    c.end = SimDate(2011, 0);
    c.population_size = kSize;
    c.seed = 3;
    c.migration = false;
    const auto r = run(c, vital_models());
    SelfCensus out;
    for (std::size_t i = 0; i < 3; ++i) out.snaps[i] = *r.snapshot_at(SimDate(kCensusYears[i], 0));
    out.census = census_from_run(r, vital_models().codebook.size(), 200.0);
    return out;
  }();
  return sc;
}

}  // namespace

TEST(Calibration, SelfCensusGivesZeroRates) {
  const auto& sc = self_census();
  const auto cal = estimate_schedule(sc.snaps, sc.census, vital_models().codebook);
  EXPECT_DOUBLE_EQ(cal.rescale, 200.0);
  ASSERT_EQ(cal.cohorts.size(), 2u * 2 * 18 * 16);
  for (const auto& e : cal.cohorts) {
    EXPECT_EQ(e.net_migration, 0.0);
    EXPECT_EQ(e.k, 0.0);
    EXPECT_EQ(e.law, MigrationLaw::Absolute);
  }
}

TEST(Calibration, FullPipelineSelfConsistent) {
  // The inner run repeats the census-generating run exactly (same seed and
  // size), so every cohort matches.
  Models m = vital_models();
  m.census = self_census().census;
  const auto cal = calibrate_migration(m, kSize, 3);
  for (const auto& e : cal.schedule.entries()) EXPECT_EQ(e.k, 0.0);
}

TEST(Calibration, InflatedCohortIsFoundAlone) {
  const auto& sc = self_census();
  CensusTable census = sc.census;
  const auto& book = vital_models().codebook;
  const EthnicGroup ow = book.at(kOtherWhite);
  // The 2001 cohort aged 20-24 is 30-34 in 2011.
  const SAEKey cell{Sex::Female, AgeGroup(6), ow};
  census.set(2011, cell, census.count(2011, cell) + 1000);
  const auto cal = estimate_schedule(sc.snaps, census, book);
  for (const auto& e : cal.cohorts) {
    const bool target = e.cohort == CohortKey{Sex::Female, ow, 4, 2001};
    if (target) {
      EXPECT_DOUBLE_EQ(e.net_migration, 1000);
      EXPECT_DOUBLE_EQ(e.k, 100);
    } else {
      EXPECT_EQ(e.k, 0.0);
    }
  }
}

TEST(Calibration, ShrinkingBritishCohortUsesRelativeLaw) {
  const auto& sc = self_census();
  CensusTable census = sc.census;
  const auto& book = vital_models().codebook;
  const EthnicGroup wb = book.at(kWhiteBritish);
  const SAEKey cell{Sex::Male, AgeGroup(8), wb};  // 1991 cohort aged 30-34, ten years on
  const auto before = census.count(2001, cell);
  census.set(2001, cell, before - 2000);
  const auto cal = estimate_schedule(sc.snaps, census, book);
  const auto& r = cal.schedule.rate(CohortKey{Sex::Male, wb, 6, 1991});
  EXPECT_EQ(r.law, MigrationLaw::Relative);
  const double n0 = census_cohort_size(census, Sex::Male, wb, 6, 1991, false);
  EXPECT_NEAR(r.k, std::log1p(-2000.0 / n0) / 10.0, 1e-15);
  // The same shortfall in an EU cohort stays absolute.
  const EthnicGroup ow = book.at(kOtherWhite);
  const SAEKey oc{Sex::Male, AgeGroup(8), ow};
  census.set(2001, oc, census.count(2001, oc) - 20);
  const auto cal2 = estimate_schedule(sc.snaps, census, book);
  EXPECT_EQ(cal2.schedule.rate(CohortKey{Sex::Male, ow, 6, 1991}).law, MigrationLaw::Absolute);
}

TEST(Calibration, RelativeFallsBackWhenUndefined) {
  // Closed simulated cohorts only shrink, so an undefined logarithm needs a
  // simulated cohort that grew; plant one.
  auto snaps = self_census().snaps;
  const auto& book = vital_models().codebook;
  const EthnicGroup irish = book.at(kIrish);
  snaps[1].living[snaps[1].index(Sex::Female, 46, irish)] += 1000;
  const auto cal = estimate_schedule(snaps, self_census().census, book);
  bool seen = false;
  for (const auto& e : cal.cohorts)
    if (e.cohort == CohortKey{Sex::Female, irish, 7, 1991}) {
      seen = true;
      EXPECT_TRUE(e.relative_fallback);
      EXPECT_EQ(e.law, MigrationLaw::Absolute);
      EXPECT_DOUBLE_EQ(e.k, e.net_migration / 10);
      EXPECT_LE(e.net_migration, -e.census_start);
    } else {
      EXPECT_FALSE(e.relative_fallback);
    }
  EXPECT_TRUE(seen);
}

TEST(Calibration, OldestCohortMergesIntoOpenBand) {
  const auto& census = demosim::testing::synth().census;
  const EthnicGroup wb = vital_models().codebook.at(kWhiteBritish);
  double start = 0;
  for (int b = 15; b < 18; ++b) start += static_cast<double>(census.count(1991, SAEKey{Sex::Male, AgeGroup(b), wb}));
  EXPECT_EQ(census_cohort_size(census, Sex::Male, wb, 15, 1991, false), start);
  EXPECT_EQ(census_cohort_size(census, Sex::Male, wb, 15, 1991, true),
            static_cast<double>(census.count(2001, SAEKey{Sex::Male, AgeGroup(17), wb})));
  EXPECT_EQ(census_cohort_size(census, Sex::Male, wb, 3, 1991, true),
            static_cast<double>(census.count(2001, SAEKey{Sex::Male, AgeGroup(5), wb})));
}

TEST(Calibration, MissingCensusNamed) {
  Models m = vital_models();
  CensusTable c(m.codebook.size());
  c.set_cells(1991, m.census.cells(1991));
  c.set_cells(2001, m.census.cells(2001));
  m.census = c;
  try {
    calibrate_migration(m, 1000, 1);
    FAIL();
  } catch (const CalibrationError& e) {
    EXPECT_NE(std::string(e.what()).find("2011"), std::string::npos);
  }
}

TEST(Calibration, SnapshotDatesChecked) {
  auto snaps = self_census().snaps;
  snaps[1].date = SimDate(2000, 0);
  EXPECT_THROW(estimate_schedule(snaps, self_census().census, vital_models().codebook), DomainError);
}

TEST(Calibration, SyntheticDatasetShowsDesignedFlows) {
  const auto& m = demosim::testing::full_models();
  const EthnicGroup ow = m.codebook.at(kOtherWhite);
  const EthnicGroup wb = m.codebook.at(kWhiteBritish);
  double ow91 = 0, ow01 = 0;
  for (int s = 0; s < 2; ++s)
    for (int b = 0; b < kBaseBands; ++b) {
      ow91 += m.migration.rate(CohortKey{static_cast<Sex>(s), ow, b, 1991}).k;
      ow01 += m.migration.rate(CohortKey{static_cast<Sex>(s), ow, b, 2001}).k;
    }
  // Designed inflows of 25k/yr before 2004 and 130k/yr after.
  EXPECT_GT(ow91, 10000);
  EXPECT_GT(ow01, 3 * ow91);
  // Working-age White British cohorts emigrate under the relative law.
  EXPECT_EQ(m.migration.rate(CohortKey{Sex::Male, wb, 6, 2001}).law, MigrationLaw::Relative);
  EXPECT_LT(m.migration.rate(CohortKey{Sex::Male, wb, 6, 2001}).k, 0);
}
