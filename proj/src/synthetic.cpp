#include "demosim/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "demosim/ledger.hpp"

namespace demosim {

namespace {

constexpr std::int64_t kTotal1991 = 50'000'000;
constexpr int kFirstRateYear = 1961;
constexpr int kLastRateYear = 2016;
constexpr int kFirstCohort = 1930;
constexpr int kLastCohort = 2000;
constexpr int kTopAge = 99;  // 85+ is spread over 85..99

// Shares of the 1991 population, in codebook order.
constexpr std::array<double, 18> kEthnicShare{.880, .012, .001, .022, .003, .001, .003, .002, .017,
                                              .009, .003, .003, .004, .005, .010, .003, .001, .021};

// Share of each 5-year band in the 1991 population.
constexpr std::array<double, AgeGroup::kCount> kAgeProfile{6.6, 6.3, 6.0, 6.6, 7.6, 8.0, 7.0, 6.7, 7.1,
                                                           6.0, 5.3, 5.1, 5.0, 4.9, 4.0, 3.3, 2.1, 1.4};

double female_share(int band) {
  if (band < 4) return 0.487;
  if (band < 9) return 0.495;
  if (band < 12) return 0.50;
  if (band < 14) return 0.52;
  if (band < 16) return 0.57;
  if (band < 17) return 0.65;
  return 0.74;
}

// Age tilt of each group's 1991 profile: minorities are younger.
double age_tilt(const std::string& name) {
  if (name == kWhiteBritish) return 0.0;
  if (name == kIrish) return 0.01;
  if (name == kOtherWhite) return -0.01;
  return -0.035;
}

double annual_hazard(Sex sex, double age, int year) {
  const double a = sex == Sex::Female ? 2.5e-5 : 5.0e-5;
  const double b = sex == Sex::Female ? 0.095 : 0.090;
  double h = 2.0e-4 + a * std::exp(b * age);
  if (age < 5) h += 2.0e-3;
  return h * std::exp(-0.015 * (year - 1991));
}

double mortality_rate(Sex sex, int band, int year) {
  const double mid = band == AgeGroup::kCount - 1 ? 90.0 : AgeGroup(band).lower() + 2.5;
  return -std::expm1(-annual_hazard(sex, mid, year));
}

// Annual births per woman in a band for a mother's cohort.
double birth_rate(int band, int cohort) {
  const double x = std::clamp((cohort - kFirstCohort) / 35.0, 0.0, 1.0);
  const double tfr = 2.3 - 0.45 * x;
  const double mean_age = 26.0 + 4.0 * std::clamp((cohort - kFirstCohort) / 50.0, 0.0, 1.0);
  std::array<double, 7> w{};
  for (int i = 0; i < 7; ++i) {
    const double centre = 17.5 + 5 * i;
    w[static_cast<std::size_t>(i)] = std::exp(-0.5 * std::pow((centre - mean_age) / 6.0, 2));
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  return tfr * w[static_cast<std::size_t>(band - 3)] / sum / 5.0;
}

double twin_prob(int band, int year) {
  const double centre = AgeGroup(band).lower() + 2.5;
  const double trend = std::max(0.8, 1.0 + 0.01 * (year - 1975));
  return (0.008 + 0.0004 * (centre - 17.5)) * trend;
}

double tfr(const std::string& name, int year) {
  const double t = std::clamp((year - 1991) / 25.0, 0.0, 1.0);
  if (name == kWhiteBritish) return 1.75 + 0.05 * t;
  if (name == kIrish) return 1.7;
  if (name == kOtherWhite) return 1.7 + 0.1 * t;
  if (name == "Indian") return 2.1 - 0.2 * t;
  if (name == "Pakistani") return 3.2 - 0.7 * t;
  if (name == "Bangladeshi") return 3.4 - 1.0 * t;
  if (name == "Chinese") return 1.4;
  if (name == "African") return 2.8 - 0.3 * t;
  if (name == "Caribbean") return 1.9;
  return 2.0;
}

constexpr double kMaleShare = 0.5135;

// Weight of an arrival age in the net migration profile.
double arrival_weight(int age) {
  if (age >= 20 && age < 35) return 1.0;
  if ((age >= 15 && age < 20) || (age >= 35 && age < 45)) return 0.3;
  if (age < 15) return 0.15;
  if (age < 65) return 0.1;
  return 0.0;
}

using Ages = std::array<double, kAgeCount>;

}  // namespace

Dataset synthetic_dataset(const SyntheticMigration& mig) {
  Dataset d;
  d.codebook = EthnicCodebook::ons2011();
  const int E = d.codebook.size();

  auto& f = d.fertility;
  f.birth_rates = RateTable({Axis::range(Dim::AgeGroup, 3, 9, true),
                             Axis::range(Dim::BirthYear, kFirstCohort, kLastCohort, true)});
  for (int b = 3; b <= 9; ++b)
    for (int c = kFirstCohort; c <= kLastCohort; ++c)
      f.birth_rates.set(Coords().age_group(AgeGroup(b)).birth_year(c), birth_rate(b, c));

  std::vector<int> tfr_groups(static_cast<std::size_t>(E));
  std::iota(tfr_groups.begin(), tfr_groups.end(), 0);
  tfr_groups.push_back(kAllEthnicities);
  f.tfr = RateTable({Axis{Dim::Ethnicity, tfr_groups, false}, Axis::range(Dim::Year, 1991, kLastRateYear, true)});
  for (int y = 1991; y <= kLastRateYear; ++y) {
    double avg = 0;
    for (int e = 0; e < E; ++e) {
      const double v = tfr(d.codebook.names()[static_cast<std::size_t>(e)], y);
      f.tfr.set(Coords().ethnicity(e).year(y), v);
      avg += kEthnicShare[static_cast<std::size_t>(e)] * v;
    }
    f.tfr.set(Coords().ethnicity(kAllEthnicities).year(y), avg);
  }

  f.multiplicity = RateTable({Axis::range(Dim::AgeGroup, 3, 9, true),
                              Axis::range(Dim::Year, kFirstRateYear, kLastRateYear, true)});
  for (int b = 3; b <= 9; ++b)
    for (int y = kFirstRateYear; y <= kLastRateYear; ++y)
      f.multiplicity.set(Coords().age_group(AgeGroup(b)).year(y), twin_prob(b, y));

  f.male_share = RateTable({Axis::range(Dim::Year, kFirstRateYear, kLastRateYear, true)});
  for (int y = kFirstRateYear; y <= kLastRateYear; ++y) f.male_share.set(Coords().year(y), kMaleShare);

  d.mortality.rates = RateTable({Axis{Dim::Sex, {0, 1}, false}, Axis::range(Dim::AgeGroup, 0, 17, true),
                                 Axis::range(Dim::Year, kFirstRateYear, kLastRateYear, true)});
  for (int s = 0; s < kSexCount; ++s)
    for (int b = 0; b < AgeGroup::kCount; ++b)
      for (int y = kFirstRateYear; y <= kLastRateYear; ++y)
        d.mortality.rates.set(Coords().sex(static_cast<Sex>(s)).age_group(AgeGroup(b)).year(y),
                              mortality_rate(static_cast<Sex>(s), b, y));

  // 1991 census.
  d.census = CensusTable(E);
  const CellIndexer idx(E);
  std::vector<std::int64_t> cells(static_cast<std::size_t>(idx.size()), 0);
  for (int e = 0; e < E; ++e) {
    const double tilt = age_tilt(d.codebook.names()[static_cast<std::size_t>(e)]);
    std::array<double, AgeGroup::kCount> w{};
    for (int b = 0; b < AgeGroup::kCount; ++b)
      w[static_cast<std::size_t>(b)] = kAgeProfile[static_cast<std::size_t>(b)] * std::exp(tilt * (5.0 * b + 2.5));
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    const double group = static_cast<double>(kTotal1991) * kEthnicShare[static_cast<std::size_t>(e)];
    for (int b = 0; b < AgeGroup::kCount; ++b) {
      const double n = group * w[static_cast<std::size_t>(b)] / sum;
      const EthnicGroup g{static_cast<std::uint8_t>(e)};
      cells[static_cast<std::size_t>(idx.index(Sex::Female, b, g))] = std::llround(n * female_share(b));
      cells[static_cast<std::size_t>(idx.index(Sex::Male, b, g))] = std::llround(n * (1.0 - female_share(b)));
    }
  }
  // Absorb rounding so the total is exact.
  const std::int64_t sum = std::accumulate(cells.begin(), cells.end(), std::int64_t{0});
  cells[static_cast<std::size_t>(idx.index(Sex::Female, 5, EthnicGroup{0}))] += kTotal1991 - sum;
  d.census.set_cells(1991, cells);

  // Single-year projection, 1 July to 1 July.
  std::vector<std::array<Ages, 2>> pop(static_cast<std::size_t>(E));
  for (int e = 0; e < E; ++e)
    for (int s = 0; s < kSexCount; ++s) {
      Ages& a = pop[static_cast<std::size_t>(e)][static_cast<std::size_t>(s)];
      a.fill(0.0);
      for (int b = 0; b < AgeGroup::kCount; ++b) {
        const double n = static_cast<double>(
            cells[static_cast<std::size_t>(idx.index(static_cast<Sex>(s), b, EthnicGroup{static_cast<std::uint8_t>(e)}))]);
        const int lo = AgeGroup(b).lower();
        const int hi = b == AgeGroup::kCount - 1 ? kTopAge + 1 : lo + AgeGroup::kWidth;
        for (int x = lo; x < hi; ++x) a[static_cast<std::size_t>(x)] = n / (hi - lo);
      }
    }

  const EthnicGroup wb = d.codebook.at(kWhiteBritish);
  const EthnicGroup irish = d.codebook.at(kIrish);
  const EthnicGroup ow = d.codebook.at(kOtherWhite);
  double minority_share = 0;
  for (int e = 0; e < E; ++e)
    if (d.codebook.aggregate(EthnicGroup{static_cast<std::uint8_t>(e)}) == EthnicAggregate::Other)
      minority_share += kEthnicShare[static_cast<std::size_t>(e)];
  double arrival_sum = 0;
  for (int x = 0; x < kAgeCount; ++x) arrival_sum += arrival_weight(x);
  const double irish_ages = 50.0;  // ages 20..69

  for (int y = 1991; y < 2011; ++y) {
    const double all_tfr = f.tfr.lookup_flat(Coords().ethnicity(kAllEthnicities).year(y));
    for (int e = 0; e < E; ++e) {
      const EthnicGroup g{static_cast<std::uint8_t>(e)};
      auto& fem = pop[static_cast<std::size_t>(e)][0];
      auto& mal = pop[static_cast<std::size_t>(e)][1];
      const double scale = f.tfr.lookup_flat(Coords().ethnicity(e).year(y)) / all_tfr;
      double births = 0;
      for (int x = 15; x < 50; ++x)
        births += fem[static_cast<std::size_t>(x)] *
                  f.birth_rates.lookup_flat(Coords().age_group(AgeGroup::of_age(x)).birth_year(y - x)) * scale;
      for (int s = 0; s < kSexCount; ++s) {
        Ages& a = s == 0 ? fem : mal;
        Ages next{};
        for (int x = 0; x < kAgeCount; ++x) {
          const double q = d.mortality.rates.lookup_flat(
              Coords().sex(static_cast<Sex>(s)).age_group(AgeGroup::of_age(x)).year(y));
          next[static_cast<std::size_t>(std::min(x + 1, kMaxAge))] += a[static_cast<std::size_t>(x)] * (1.0 - q);
        }
        const double q0 = d.mortality.rates.lookup_flat(Coords().sex(static_cast<Sex>(s)).age_group(AgeGroup(0)).year(y));
        next[0] = births * (s == 1 ? kMaleShare : 1.0 - kMaleShare) * (1.0 - q0 / 2.0);
        a = next;
      }
      // Net migration, by age at the end of the year.
      const auto agg = d.codebook.aggregate(g);
      for (int s = 0; s < kSexCount; ++s) {
        Ages& a = s == 0 ? fem : mal;
        for (int x = 0; x < kAgeCount; ++x) {
          double dm = 0;
          if (g == ow) {
            const double total = y < 2004 ? mig.other_white_early : mig.other_white_late;
            const double sex_share = s == 0 ? mig.other_white_female_share : 1.0 - mig.other_white_female_share;
            dm = total * sex_share * arrival_weight(x) / arrival_sum;
          } else if (agg == EthnicAggregate::Other) {
            dm = mig.other_groups * kEthnicShare[static_cast<std::size_t>(e)] / minority_share * 0.5 *
                 arrival_weight(x) / arrival_sum;
          } else if (g == irish && x >= 20 && x < 70) {
            dm = mig.irish * 0.5 / irish_ages;
          } else if (g == wb && x >= 20 && x < 70) {
            dm = a[static_cast<std::size_t>(x)] * std::expm1(mig.white_british_rate);
          }
          a[static_cast<std::size_t>(x)] = std::max(0.0, a[static_cast<std::size_t>(x)] + dm);
        }
      }
    }
    if (y + 1 == 2001 || y + 1 == 2011) {
      std::vector<std::int64_t> c(static_cast<std::size_t>(idx.size()), 0);
      for (int e = 0; e < E; ++e)
        for (int s = 0; s < kSexCount; ++s) {
          std::array<double, AgeGroup::kCount> banded{};
          const Ages& a = pop[static_cast<std::size_t>(e)][static_cast<std::size_t>(s)];
          for (int x = 0; x < kAgeCount; ++x) banded[static_cast<std::size_t>(AgeGroup::of_age(x).index())] += a[static_cast<std::size_t>(x)];
          for (int b = 0; b < AgeGroup::kCount; ++b)
            c[static_cast<std::size_t>(idx.index(static_cast<Sex>(s), b, EthnicGroup{static_cast<std::uint8_t>(e)}))] =
                std::llround(banded[static_cast<std::size_t>(b)]);
        }
      d.census.set_cells(y + 1, c);
    }
  }
  validate(d);
  return d;
}

}  // namespace demosim
