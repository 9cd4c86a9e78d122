#include <gtest/gtest.h>

#include <fstream>

#include "demosim/csv.hpp"
#include "demosim/data.hpp"
#include "support.hpp"

using namespace demosim;
using demosim::testing::synth;
using demosim::testing::temp_dir;

namespace {

RateTable year_table() {
  RateTable t({Axis::range(Dim::Year, 1991, 2011, true)});
  for (int y = 1991; y <= 2011; ++y) t.set(Coords().year(y), y - 1990);
  return t;
}

void replace_line(const std::filesystem::path& file, std::size_t line, const std::string& text) {
  std::ifstream in(file);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  in.close();
  lines.at(line - 1) = text;
  std::ofstream out(file);
  for (const auto& l : lines) out << l << '\n';
}

bool mentions(const DataError& e, const std::string& needle) {
  for (const auto& i : e.issues())
    if (i.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(RateTable, FlatExtrapolation) {
  const auto t = year_table();
  EXPECT_EQ(t.lookup_flat(Coords().year(2030)), 21);
  EXPECT_EQ(t.lookup_flat(Coords().year(1950)), 1);
  EXPECT_EQ(t.lookup_flat(Coords().year(2000)), 10);
}

TEST(RateTable, MissingDimensionThrows) {
  const auto t = year_table();
  EXPECT_THROW(t.lookup_flat(Coords().birth_year(2000)), DomainError);
}

TEST(RateTable, CategoricalAxisIsNotExtrapolated) {
  RateTable t({Axis{Dim::Ethnicity, {0, 3}, false}, Axis::range(Dim::Year, 2000, 2001, true)});
  t.set(Coords().ethnicity(3).year(2000), 1.5);
  EXPECT_EQ(t.lookup_flat(Coords().ethnicity(3).year(1800)), 1.5);
  EXPECT_THROW(t.lookup_flat(Coords().ethnicity(1).year(2000)), DomainError);
  EXPECT_FALSE(t.covers(Coords().ethnicity(1).year(2000)));
  EXPECT_TRUE(t.covers(Coords().ethnicity(0).year(3000)));
}

TEST(RateTable, LookupIdempotentUnderClamp) {
  const auto& t = synth().mortality.rates;
  for (int y = 1900; y <= 2100; y += 7)
    for (int ag = 0; ag < AgeGroup::kCount; ++ag)
      for (Sex s : {Sex::Female, Sex::Male}) {
        const Coords c = Coords().year(y).age_group(AgeGroup(ag)).sex(s);
        EXPECT_EQ(t.lookup_flat(t.clamp(c)), t.lookup_flat(c));
      }
}

TEST(RateTable, SetOutsideRangeThrows) {
  auto t = year_table();
  EXPECT_THROW(t.set(Coords().year(2012), 1.0), DomainError);
}

TEST(Census, TotalsAndCells) {
  CensusTable c(2);
  c.set(2001, SAEKey{Sex::Male, AgeGroup(3), EthnicGroup{1}}, 7);
  c.set(2001, SAEKey{Sex::Female, AgeGroup(0), EthnicGroup{0}}, 5);
  EXPECT_EQ(c.total(2001), 12);
  EXPECT_EQ(c.count(2001, SAEKey{Sex::Male, AgeGroup(3), EthnicGroup{1}}), 7);
  EXPECT_TRUE(c.has_year(2001));
  EXPECT_FALSE(c.has_year(1991));
  EXPECT_THROW(c.cells(1991), DomainError);
}

TEST(Dataset, SyntheticIsValid) { EXPECT_NO_THROW(validate(synth())); }

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = temp_dir("dataset");
  save_dataset(synth(), dir);
  const Dataset back = load_dataset(dir);
  EXPECT_EQ(back, synth());
  std::filesystem::remove_all(dir);
}

TEST(Dataset, BundledMatchesGenerator) {
  const Dataset bundled = load_dataset(std::filesystem::path(DEMOSIM_SOURCE_DIR) / "data" / "synthetic");
  EXPECT_EQ(bundled, synth());
}

TEST(Dataset, NegativeMortalityRejectedWithRow) {
  const auto dir = temp_dir("badrate");
  save_dataset(synth(), dir);
  replace_line(dir / "mortality.csv", 5, "F,0-4,1964,-0.1");
  try {
    load_dataset(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_TRUE(mentions(e, "mortality.csv:5")) << e.what();
  }
  std::filesystem::remove_all(dir);
}

TEST(Dataset, ProbabilityAboveOneRejected) {
  const auto dir = temp_dir("badprob");
  save_dataset(synth(), dir);
  replace_line(dir / "multiplicity.csv", 3, "15-19,1962,1.2");
  replace_line(dir / "mortality.csv", 7, "F,0-4,1966,abc");
  try {
    load_dataset(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    // Every offending row is listed, not just the first.
    EXPECT_TRUE(mentions(e, "multiplicity.csv:3"));
    EXPECT_TRUE(mentions(e, "mortality.csv:7"));
  }
  std::filesystem::remove_all(dir);
}

TEST(Dataset, MissingFileRejected) {
  const auto dir = temp_dir("nofile");
  save_dataset(synth(), dir);
  std::filesystem::remove(dir / "tfr.csv");
  try {
    load_dataset(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_TRUE(mentions(e, "tfr.csv"));
  }
  std::filesystem::remove_all(dir);
}

TEST(Dataset, MissingCensusYearNamesCalibration) {
  Dataset d = synth();
  CensusTable c(d.codebook.size());
  for (int y : {1991, 2011}) c.set_cells(y, d.census.cells(y));
  d.census = c;
  try {
    validate(d);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_TRUE(mentions(e, "migration calibration impossible"));
    EXPECT_TRUE(mentions(e, "2001"));
  }
}

TEST(Dataset, MissingCensusCellReported) {
  const auto dir = temp_dir("nocell");
  save_dataset(synth(), dir);
  replace_line(dir / "census.csv", 2, "1991,F,0-4,Irish,13291");  // duplicates line 3
  try {
    load_dataset(dir);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_TRUE(mentions(e, "duplicate"));
    EXPECT_TRUE(mentions(e, "missing 1 of"));
  }
  std::filesystem::remove_all(dir);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.0, 1.0, 0.1, 1e-300, 123456.789, -2.5, 0.0034938873660782426}) {
    double back;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    EXPECT_EQ(back, v);
  }
}

TEST(Csv, ParseRejectsJunk) {
  double d;
  std::int64_t i;
  EXPECT_FALSE(csv::parse_double("1.5x", d));
  EXPECT_FALSE(csv::parse_double("", d));
  EXPECT_FALSE(csv::parse_int("12.0", i));
  EXPECT_TRUE(csv::parse_int("-12", i));
  EXPECT_EQ(i, -12);
}
