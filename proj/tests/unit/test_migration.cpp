#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "demosim/migration.hpp"
#include "support.hpp"

using namespace demosim;
using demosim::testing::book;
using demosim::testing::make_person;
using demosim::testing::temp_dir;

TEST(NetMigration, Examples) {
  EXPECT_EQ(estimate_net_migration(100, 100, 90, 90), 0);
  EXPECT_EQ(estimate_net_migration(100, 100, 90, 120), 30);
  EXPECT_EQ(estimate_net_migration(100, 100, 95, 80), -15);
}

TEST(SelectLaw, Examples) {
  EXPECT_EQ(select_law(EthnicAggregate::NativeBritish, 10), MigrationLaw::Absolute);
  EXPECT_EQ(select_law(EthnicAggregate::NativeBritish, 0), MigrationLaw::Absolute);
  EXPECT_EQ(select_law(EthnicAggregate::NativeBritish, -1), MigrationLaw::Relative);
  EXPECT_EQ(select_law(EthnicAggregate::EUImmigrant, -1), MigrationLaw::Absolute);
  EXPECT_EQ(select_law(EthnicAggregate::Other, -1), MigrationLaw::Absolute);
}

TEST(RateFromDelta, Examples) {
  EXPECT_EQ(rate_from_delta(0, 100, 10, MigrationLaw::Absolute), 0);
  EXPECT_EQ(rate_from_delta(0, 100, 10, MigrationLaw::Relative), 0);
  EXPECT_EQ(rate_from_delta(100, 0, 10, MigrationLaw::Absolute), 10);
  EXPECT_NEAR(rate_from_delta(-500, 1000, 10, MigrationLaw::Relative), std::log(0.5) / 10, 1e-16);
  EXPECT_NEAR(rate_from_delta(-500, 1000, 10, MigrationLaw::Relative), -0.069315, 1e-6);
  EXPECT_THROW(rate_from_delta(-1000, 1000, 10, MigrationLaw::Relative), DomainError);
  EXPECT_THROW(rate_from_delta(5, 0, 10, MigrationLaw::Relative), DomainError);
}

TEST(ApplyRate, Examples) {
  EXPECT_EQ(apply_rate(10, MigrationLaw::Absolute, 3, 0.25), 2.5);
  EXPECT_EQ(apply_rate(-100, MigrationLaw::Absolute, 3, 0.25), -3);
  // Direct evaluation gives -53.574.
  EXPECT_NEAR(apply_rate(-0.069315, MigrationLaw::Relative, 800, 1), 800 * std::expm1(-0.069315), 1e-12);
  EXPECT_NEAR(apply_rate(-0.069315, MigrationLaw::Relative, 800, 1), -53.574, 0.001);
}

TEST(ApplyRate, NeverEmptiesBelowZeroAndKeepsSign) {
  RandomStream r(1, 0, 0, Purpose::Test);
  for (int i = 0; i < 1000; ++i) {
    const double k = (r.uniform() - 0.5) * 2000;
    const double n = std::floor(r.uniform() * 500);
    const double dt = 0.01 + r.uniform();
    EXPECT_GE(n + apply_rate(k, MigrationLaw::Absolute, n, dt), 0.0);
    const double kr = (r.uniform() - 0.5) * 3;
    const double m = apply_rate(kr, MigrationLaw::Relative, n, dt);
    EXPECT_GE(n + m, 0.0);
    if (n > 0) { EXPECT_EQ(std::signbit(m), std::signbit(kr)); }
  }
}

TEST(RateRoundTrip, RelativeRecoversDelta) {
  for (double dm : {-900.0, -10.0, 0.0, 35.0, 4000.0}) {
    const double k = rate_from_delta(dm, 1000, 10, MigrationLaw::Relative);
    EXPECT_NEAR(apply_rate(k, MigrationLaw::Relative, 1000, 10), dm, 1e-9);
  }
}

TEST(CohortAges, ShiftWithElapsedYears) {
  EXPECT_EQ(elapsed_years(1991, SimDate(1991, 0)), 0);
  EXPECT_EQ(elapsed_years(1991, SimDate(1991, 3)), 0);
  EXPECT_EQ(elapsed_years(1991, SimDate(1996, 2)), 5);
  EXPECT_EQ(cohort_age_range(4, 1991, SimDate(1994, 1)), (AgeRange{23, 28}));
  EXPECT_EQ(cohort_age_range(15, 2001, SimDate(2003, 0)), (AgeRange{77, std::nullopt}));
  EXPECT_EQ(post_census_age_range(2), (AgeRange{15, 20}));
  EXPECT_EQ(post_census_age_range(15), (AgeRange{80, std::nullopt}));
}

TEST(CohortAges, BaseBandOfAge) {
  EXPECT_EQ(migration_base_band(30, SimDate(1990, 3)), std::nullopt);
  EXPECT_EQ(migration_base_band(3, SimDate(1995, 0)), std::nullopt);  // born this decade
  EXPECT_EQ(migration_base_band(4, SimDate(1995, 0)), 0);
  EXPECT_EQ(migration_base_band(24, SimDate(1995, 0)), 4);
  EXPECT_EQ(migration_base_band(99, SimDate(1995, 0)), 15);
  EXPECT_EQ(migration_base_band(5, SimDate(2001, 0)), 1);
  EXPECT_EQ(migration_base_band(4, SimDate(2030, 0)), std::nullopt);
  EXPECT_EQ(migration_base_band(5, SimDate(2030, 0)), 0);
  EXPECT_EQ(migration_base_band(27, SimDate(2030, 0)), 4);
}

TEST(CohortAges, BandConsistentWithRange) {
  for (int q = 1991 * 4; q < 2011 * 4; q += 3) {
    const auto d = SimDate::from_quarters(q);
    for (int age = 0; age <= 110; ++age) {
      const auto b = migration_base_band(age, d);
      if (!b) continue;
      const int decade = d < SimDate(2001, 0) ? 1991 : 2001;
      EXPECT_TRUE(cohort_age_range(*b, decade, d).contains(age)) << age << " " << d.to_string();
    }
  }
}

TEST(Schedule, BaselineUsesDecadeThenReference) {
  MigrationSchedule s(book().size());
  const EthnicGroup ow = book().at(kOtherWhite);
  s.set({CohortKey{Sex::Male, ow, 4, 1991}, MigrationLaw::Absolute, 100});
  s.set({CohortKey{Sex::Male, ow, 4, 2001}, MigrationLaw::Absolute, 300});
  EXPECT_EQ(s.baseline(Sex::Male, ow, 4, SimDate(1995, 0)).k, 100);
  EXPECT_EQ(s.baseline(Sex::Male, ow, 4, SimDate(2005, 0)).k, 300);
  EXPECT_EQ(s.baseline(Sex::Male, ow, 4, SimDate(2030, 0)).k, 300);
  EXPECT_EQ(s.baseline(Sex::Female, ow, 4, SimDate(2030, 0)).k, 0);
  EXPECT_THROW(s.rate(CohortKey{Sex::Male, ow, 16, 1991}), DomainError);
  EXPECT_THROW(s.rate(CohortKey{Sex::Male, ow, 3, 2011}), DomainError);
}

TEST(Schedule, CsvRoundTrip) {
  MigrationSchedule s(book().size());
  RandomStream r(4, 0, 0, Purpose::Test);
  for (auto e : s.entries()) {
    e.k = (r.uniform() - 0.5) * 1e4;
    if (r.uniform() < 0.3) {
      e.law = MigrationLaw::Relative;
      e.k = (r.uniform() - 0.5) * 0.01;
    }
    s.set(e);
  }
  const auto dir = temp_dir("schedule");
  s.save(dir / "s.csv", book());
  EXPECT_EQ(MigrationSchedule::load(dir / "s.csv", book()), s);
  std::filesystem::remove_all(dir);
}

TEST(BaseBandLabels, RoundTrip) {
  for (int b = 0; b < kBaseBands; ++b) EXPECT_EQ(parse_base_band(base_band_label(b)), b);
  EXPECT_EQ(base_band_label(15), "75+");
  EXPECT_THROW(parse_base_band("80-84"), DomainError);
}

namespace {

Population arrivals(const std::vector<SimDate>& dates) {
  Population pop;
  for (auto d : dates) {
    Person p = make_person(Sex::Male, SimDate(1980, 0), kOtherWhite);
    p.immigrated = d;
    pop.add(p);
  }
  return pop;
}

}  // namespace

TEST(SelectMigrants, WholeGroupEitherMode) {
  const auto pop = arrivals({SimDate(2005, 0), SimDate(2010, 0), SimDate(2015, 0)});
  const std::vector<PersonId> all{0, 1, 2};
  RandomStream r(1, 0, 0, Purpose::Test);
  for (auto mode : {SelectionMode::Random, SelectionMode::LIFO}) {
    auto got = select_migrants(pop, all, 3, mode, r);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, all);
  }
  EXPECT_THROW(select_migrants(pop, all, 4, SelectionMode::LIFO, r), DomainError);
}

TEST(SelectMigrants, LifoTakesLatestArrival) {
  const auto pop = arrivals({SimDate(2005, 0), SimDate(2015, 0), SimDate(2010, 0)});
  const std::vector<PersonId> all{0, 1, 2};
  RandomStream r(1, 0, 0, Purpose::Test);
  EXPECT_EQ(select_migrants(pop, all, 1, SelectionMode::LIFO, r), (std::vector<PersonId>{1}));
  EXPECT_EQ(select_migrants(pop, all, 2, SelectionMode::LIFO, r), (std::vector<PersonId>{1, 2}));
}

TEST(SelectMigrants, LifoTiesByDescendingIdAndIgnoresRng) {
  const auto pop = arrivals({SimDate(2010, 0), SimDate(2010, 0), SimDate(2010, 0), SimDate(2001, 0)});
  const std::vector<PersonId> all{3, 0, 2, 1};
  RandomStream a(1, 0, 0, Purpose::Test), b(99, 5, 5, Purpose::Death);
  const auto x = select_migrants(pop, all, 2, SelectionMode::LIFO, a);
  EXPECT_EQ(x, (std::vector<PersonId>{2, 1}));
  EXPECT_EQ(select_migrants(pop, all, 2, SelectionMode::LIFO, b), x);
}

TEST(SelectMigrants, RandomIsUniform) {
  const auto pop = arrivals({SimDate(2005, 0), SimDate(2006, 0), SimDate(2007, 0), SimDate(2008, 0)});
  const std::vector<PersonId> all{0, 1, 2, 3};
  std::vector<int> hits(4);
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    RandomStream r(7, static_cast<std::uint64_t>(i), 0, Purpose::MigrantSelection);
    ++hits[select_migrants(pop, all, 1, SelectionMode::Random, r)[0]];
  }
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / trials, 0.25, 0.005);
}

namespace {

// A mother aged 35 with children of the given ages, at `d`.
PersonId family(Population& pop, SimDate d, std::vector<int> child_ages, std::string_view eth = kWhiteBritish) {
  const PersonId m = pop.add(make_person(Sex::Female, d - 35 * 4, eth));
  for (int a : child_ages) {
    Person c = make_person(Sex::Male, d - a * 4, eth);
    c.mother = m;
    pop.add(c);
  }
  return m;
}

}  // namespace

TEST(Emigrate, ChildlessMale) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = pop.add(make_person(Sex::Male, d - 40 * 4));
  family(pop, d, {3});
  const auto mv = emigrate(pop, std::vector<PersonId>{m}, d);
  EXPECT_EQ(mv.principals, (std::vector<PersonId>{m}));
  EXPECT_TRUE(mv.children.empty());
  EXPECT_EQ(pop.pool_size(), 1u);
}

TEST(Emigrate, YoungChildFollowsOlderStays) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = family(pop, d, {6, 12});
  const auto mv = emigrate(pop, std::vector<PersonId>{m}, d);
  EXPECT_EQ(mv.children, (std::vector<PersonId>{m + 1}));
  EXPECT_EQ(pop[m + 1].residence, Residence::Pool);
  EXPECT_EQ(pop[m + 2].residence, Residence::Living);
}

TEST(Emigrate, ChildAgedExactlyTenStays) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = family(pop, d, {10});
  const auto mv = emigrate(pop, std::vector<PersonId>{m}, d);
  EXPECT_TRUE(mv.children.empty());
}

TEST(Emigrate, RejectsNonLiving) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = pop.add(make_person(Sex::Male, d - 40 * 4));
  pop.move_to_pool(m);
  EXPECT_THROW(emigrate(pop, std::vector<PersonId>{m}, d), DomainError);
}

TEST(ReturnFromPool, ChildCoReturns) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = family(pop, d, {7});
  emigrate(pop, std::vector<PersonId>{m}, d);
  const SimDate later = d + 4;
  const auto mv = return_from_pool(pop, std::vector<PersonId>{m}, FamilyIndex(pop, later), later);
  EXPECT_EQ(mv.principals.size(), 1u);
  EXPECT_EQ(mv.children.size(), 1u);
  EXPECT_EQ(pop[m].immigrated, later);
  EXPECT_EQ(pop[m + 1].immigrated, later);
  EXPECT_EQ(pop.pool_size(), 0u);
}

TEST(Immigrate, ZeroCountNoChange) {
  Population pop;
  const SimDate d(2000, 0);
  family(pop, d, {});
  RandomStream r(1, 0, 0, Purpose::Test);
  const auto mv = immigrate(pop, SAEKey{Sex::Female, AgeGroup(7), book().at(kWhiteBritish)}, 0, d, r);
  EXPECT_TRUE(mv.principals.empty());
  EXPECT_EQ(pop.registry_size(), 1u);
}

TEST(Immigrate, ClonesMotherWithYoungChild) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = family(pop, d, {8}, kOtherWhite);
  pop[m].last_childbirth = d - 32;
  RandomStream r(1, 0, 0, Purpose::Test);
  const auto mv = immigrate(pop, SAEKey{Sex::Female, AgeGroup(7), book().at(kOtherWhite)}, 1, d, r);
  ASSERT_EQ(mv.principals.size(), 1u);
  ASSERT_EQ(mv.children.size(), 1u);
  const Person& clone = pop[mv.principals[0]];
  const Person& kid = pop[mv.children[0]];
  EXPECT_NE(clone.id, m);
  EXPECT_EQ(clone.birth, pop[m].birth);
  EXPECT_EQ(clone.last_childbirth, pop[m].last_childbirth);
  EXPECT_EQ(clone.immigrated, d);
  EXPECT_EQ(kid.mother, clone.id);
  EXPECT_EQ(kid.birth, pop[m + 1].birth);
  EXPECT_EQ(kid.immigrated, d);
  EXPECT_EQ(pop.living_size(), 4u);
}

TEST(Immigrate, EmptyCellSynthesisesInBand) {
  Population pop;
  const SimDate d(2000, 0);
  RandomStream r(1, 0, 0, Purpose::Test);
  const SAEKey key{Sex::Male, AgeGroup(6), book().at("Chinese")};
  const auto mv = immigrate(pop, key, 5, d, r);
  ASSERT_EQ(mv.principals.size(), 5u);
  for (PersonId id : mv.principals) {
    EXPECT_EQ(sae_key(pop[id], d), key);
    EXPECT_EQ(pop[id].immigrated, d);
  }
}

TEST(Immigrate, FreshIdsOnly) {
  Population pop;
  const SimDate d(2000, 0);
  for (int i = 0; i < 20; ++i) family(pop, d, {i % 12});
  std::set<PersonId> before;
  for (PersonId id : pop.active()) before.insert(id);
  RandomStream r(3, 0, 0, Purpose::Test);
  const auto mv = immigrate(pop, SAEKey{Sex::Female, AgeGroup(7), book().at(kWhiteBritish)}, 50, d, r);
  std::set<PersonId> seen;
  for (const auto* ids : {&mv.principals, &mv.children})
    for (PersonId id : *ids) {
      EXPECT_FALSE(before.contains(id));
      EXPECT_TRUE(seen.insert(id).second);
    }
}

TEST(FamilyIndex, ListsOnlyLivingYoungChildren) {
  Population pop;
  const SimDate d(2000, 0);
  const PersonId m = family(pop, d, {1, 9, 10, 15});
  pop.mark_dead(m + 1);
  const FamilyIndex f(pop, d);
  const auto kids = f.children_of(m);
  EXPECT_EQ(std::vector<PersonId>(kids.begin(), kids.end()), (std::vector<PersonId>{m + 2}));
  EXPECT_TRUE(f.children_of(m + 4).empty());
}
