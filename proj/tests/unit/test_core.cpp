#include <gtest/gtest.h>

#include <set>

#include "demosim/core.hpp"
#include "demosim/data.hpp"
#include "support.hpp"

using namespace demosim;
using demosim::testing::book;
using demosim::testing::make_person;

TEST(SimDate, QuarterArithmeticIsExact) {
  const SimDate a(1991, 0), b(2041, 0);
  EXPECT_EQ(b - a, 200);
  EXPECT_EQ(a + 200, b);
  EXPECT_LT(a, b);
  EXPECT_EQ(SimDate(2000, 3) + 1, SimDate(2001, 0));
  EXPECT_EQ(SimDate(2001, 0) - 1, SimDate(2000, 3));
}

TEST(SimDate, CalendarMapping) {
  EXPECT_EQ(SimDate(1991, 0).to_string(), "1991-07-01");
  EXPECT_EQ(SimDate(1991, 1).to_string(), "1991-10-01");
  EXPECT_EQ(SimDate(1991, 2).to_string(), "1992-01-01");
  EXPECT_EQ(SimDate(1991, 3).to_string(), "1992-04-01");
  EXPECT_EQ(SimDate::containing(2016, 6), SimDate(2015, 3));
  EXPECT_EQ(SimDate::parse("2016-06-23"), SimDate(2015, 3));
  EXPECT_EQ(SimDate::parse("2018-07-01"), SimDate(2018, 0));
  EXPECT_THROW(SimDate::parse("2018/07/01"), DomainError);
  EXPECT_THROW(SimDate(2000, 4), DomainError);
}

TEST(SimDate, NegativeQuartersFloor) {
  const auto d = SimDate::from_quarters(-1);
  EXPECT_EQ(d.year(), -1);
  EXPECT_EQ(d.quarter(), 3);
}

TEST(SimDate, ParseRoundTripsEveryQuarter) {
  for (int q = 1991 * 4; q < 2041 * 4; ++q) {
    const auto d = SimDate::from_quarters(q);
    EXPECT_EQ(SimDate::parse(d.to_string()), d);
  }
}

TEST(Sex, Codes) {
  EXPECT_EQ(parse_sex("F"), Sex::Female);
  EXPECT_EQ(parse_sex("M"), Sex::Male);
  EXPECT_EQ(sex_code(Sex::Male), "M");
  EXPECT_THROW(parse_sex("X"), DomainError);
}

TEST(AgeGroup, Binning) {
  EXPECT_EQ(AgeGroup::of_age(4).index(), 0);
  EXPECT_EQ(AgeGroup::of_age(5).index(), 1);
  EXPECT_EQ(AgeGroup::of_age(27).label(), "25-29");
  EXPECT_EQ(AgeGroup::of_age(84).label(), "80-84");
  EXPECT_EQ(AgeGroup::of_age(85).label(), "85+");
  EXPECT_EQ(AgeGroup::of_age(110).label(), "85+");
  EXPECT_THROW(AgeGroup::of_age(-1), DomainError);
}

TEST(AgeGroup, EveryAgeMapsToOneGroup) {
  for (int age = 0; age <= 120; ++age) {
    const AgeGroup g = AgeGroup::of_age(age);
    EXPECT_GE(age, g.lower());
    if (g.upper()) { EXPECT_LT(age, *g.upper()); }
  }
}

TEST(AgeGroup, LabelsRoundTrip) {
  for (int i = 0; i < AgeGroup::kCount; ++i) EXPECT_EQ(AgeGroup::parse(AgeGroup(i).label()).index(), i);
  EXPECT_THROW(AgeGroup::parse("3-7"), DomainError);
  EXPECT_THROW(AgeGroup::parse("85-89"), DomainError);
}

TEST(Codebook, DefaultHasEighteenGroupsAndAggregates) {
  const auto b = EthnicCodebook::ons2011();
  EXPECT_EQ(b.size(), 18);
  EXPECT_EQ(b.aggregate(b.at("White British")), EthnicAggregate::NativeBritish);
  EXPECT_EQ(b.aggregate(b.at("Irish")), EthnicAggregate::NativeBritish);
  EXPECT_EQ(b.aggregate(b.at("Other White")), EthnicAggregate::EUImmigrant);
  int other = 0;
  for (int i = 0; i < b.size(); ++i)
    other += b.aggregate(EthnicGroup{static_cast<std::uint8_t>(i)}) == EthnicAggregate::Other;
  EXPECT_EQ(other, 15);
  EXPECT_THROW(b.at("Martian"), DomainError);
}

TEST(AgeOf, Examples) {
  const Person p = make_person(Sex::Female, SimDate(2000, 0));
  EXPECT_EQ(age_of(p, SimDate(2000, 0)), 0);
  EXPECT_EQ(age_of(p, SimDate(2010, 0)), 10);
  const Person q = make_person(Sex::Female, SimDate(2000, 2));
  EXPECT_EQ(age_of(q, SimDate(2010, 1)), 9);
  EXPECT_THROW(age_of(q, SimDate(2000, 1)), DomainError);
}

TEST(SaeKey, Examples) {
  const auto d = SimDate(2020, 0);
  const SAEKey k = sae_key(make_person(Sex::Female, d - 27 * 4, kOtherWhite), d);
  EXPECT_EQ(k.sex, Sex::Female);
  EXPECT_EQ(k.age_group.label(), "25-29");
  EXPECT_EQ(k.ethnicity, book().at(kOtherWhite));
  EXPECT_EQ(sae_key(make_person(Sex::Male, d - 85 * 4), d).age_group.label(), "85+");
  EXPECT_EQ(sae_key(make_person(Sex::Male, d - 4 * 4), d).age_group.index(), 0);
}

TEST(CellIndexer, BijectiveOverAllCells) {
  const CellIndexer idx(18);
  EXPECT_EQ(idx.size(), 2 * 18 * 18);
  for (int i = 0; i < idx.size(); ++i) EXPECT_EQ(idx.index(idx.key(i)), i);
}

TEST(Population, IdsAreDenseAndNeverRecycled) {
  Population pop;
  std::set<PersonId> ids;
  for (int i = 0; i < 10; ++i) ids.insert(pop.add(make_person(Sex::Male, SimDate(1990, 0))));
  pop.mark_dead(3);
  pop.compact();
  const PersonId next = pop.add(make_person(Sex::Male, SimDate(1990, 0)));
  EXPECT_EQ(next, 10u);
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_EQ(pop.living_size(), 10u);
  EXPECT_EQ(pop.registry_size(), 11u);
  EXPECT_EQ(pop[3].residence, Residence::Dead);
}

TEST(Population, LivingAndPoolAreDisjoint) {
  Population pop;
  for (int i = 0; i < 6; ++i) pop.add(make_person(Sex::Female, SimDate(1980, 0)));
  pop.move_to_pool(1);
  pop.move_to_pool(2);
  pop.move_to_living(2);
  pop.mark_dead(4);
  pop.compact();
  EXPECT_EQ(pop.living_ids(), (std::vector<PersonId>{0, 2, 3, 5}));
  EXPECT_EQ(pop.pool_ids(), (std::vector<PersonId>{1}));
  EXPECT_EQ(pop.living_size() + pop.pool_size(), pop.active().size());
  EXPECT_THROW(pop.move_to_pool(1), DomainError);
  EXPECT_THROW(pop.move_to_living(0), DomainError);
  EXPECT_THROW(pop.mark_dead(4), DomainError);
}

namespace {

CensusTable one_cell_census(const SAEKey& key, std::int64_t n) {
  CensusTable c(book().size());
  std::vector<std::int64_t> cells(static_cast<std::size_t>(c.indexer().size()), 0);
  cells[static_cast<std::size_t>(c.indexer().index(key))] = n;
  c.set_cells(1991, cells);
  return c;
}

}  // namespace

TEST(InitialPopulation, SingleCellCensus) {
  const SAEKey key{Sex::Female, AgeGroup(6), book().at(kIrish)};
  const auto census = one_cell_census(key, 1000);
  const SimDate start(1991, 0);
  const Population pop = build_initial_population(census, book(), 1991, start, 500, 3);
  EXPECT_EQ(pop.living_size(), 500u);
  EXPECT_DOUBLE_EQ(pop.scale_factor(), 2.0);
  pop.for_each_living([&](const Person& p) {
    EXPECT_EQ(sae_key(p, start), key);
    EXPECT_FALSE(p.immigrated.has_value());
  });
}

TEST(InitialPopulation, OldestBandCappedAtHundred) {
  const auto census = one_cell_census(SAEKey{Sex::Male, AgeGroup(17), book().at(kWhiteBritish)}, 10);
  const SimDate start(1991, 0);
  const Population pop = build_initial_population(census, book(), 1991, start, 5000, 9);
  int lo = 1000, hi = -1;
  pop.for_each_living([&](const Person& p) {
    lo = std::min(lo, age_of(p, start));
    hi = std::max(hi, age_of(p, start));
  });
  EXPECT_EQ(lo, 85);
  EXPECT_EQ(hi, 99);
}

TEST(InitialPopulation, SharesMatchCensus) {
  const auto& census = demosim::testing::synth().census;
  const SimDate start(1991, 0);
  const std::int64_t n = 200000;
  const Population pop = build_initial_population(census, book(), 1991, start, n, 1);
  EXPECT_EQ(pop.living_size(), static_cast<std::size_t>(n));
  const Snapshot s = Snapshot::of(pop, start, book().size());
  const auto banded = s.banded();
  const auto& cells = census.cells(1991);
  const double total = static_cast<double>(census.total(1991));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    // Largest-remainder apportionment is within one person of exact.
    EXPECT_NEAR(static_cast<double>(banded[i]), cells[i] / total * n, 1.0) << i;
  }
}

TEST(InitialPopulation, DeterministicInSeed) {
  const auto& census = demosim::testing::synth().census;
  const SimDate start(1991, 0);
  const Population a = build_initial_population(census, book(), 1991, start, 5000, 11);
  const Population b = build_initial_population(census, book(), 1991, start, 5000, 11);
  const Population c = build_initial_population(census, book(), 1991, start, 5000, 12);
  bool differs = false;
  for (PersonId id = 0; id < 5000; ++id) {
    EXPECT_EQ(a[id].birth, b[id].birth);
    differs |= a[id].birth != c[id].birth;
  }
  EXPECT_TRUE(differs);
}

TEST(InitialPopulation, Errors) {
  CensusTable empty(book().size());
  EXPECT_THROW(build_initial_population(empty, book(), 1991, SimDate(1991, 0), 10, 1), DataError);
  const auto census = one_cell_census(SAEKey{}, 10);
  EXPECT_THROW(build_initial_population(census, book(), 1991, SimDate(1991, 0), 0, 1), DomainError);
}
