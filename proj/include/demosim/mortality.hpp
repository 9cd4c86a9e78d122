// Cohort mortality curves built from period death rates.
#pragma once

#include <array>
#include <map>
#include <vector>

#include "demosim/core.hpp"
#include "demosim/data.hpp"
#include "demosim/ledger.hpp"

namespace demosim {

/// Annual hazard by whole-year age for one (sex, birth year) cohort.
struct MortalityCurve {
  Sex sex = Sex::Female;
  int birth_year = 0;
  std::vector<double> hazard;  // ages 0..kMaxAge

  double hazard_at(int age) const { return hazard[static_cast<std::size_t>(age < kMaxAge ? age : kMaxAge)]; }

  friend bool operator==(const MortalityCurve&, const MortalityCurve&) = default;
};

class MortalityCurves {
 public:
  void insert(MortalityCurve curve);
  bool empty() const { return curves_[0].empty() && curves_[1].empty(); }
  bool contains(Sex sex, int birth_year) const;
  /// The curve of a cohort; cohorts outside the stored range take the
  /// nearest stored cohort's curve.
  const MortalityCurve& curve(Sex sex, int birth_year) const;
  int first_cohort() const;
  int last_cohort() const;
  std::vector<MortalityCurve> all() const;

  friend bool operator==(const MortalityCurves&, const MortalityCurves&) = default;

 private:
  std::array<std::map<int, MortalityCurve>, kSexCount> curves_;
};

/// h = -ln(1 - q).
double mortality_hazard_from_rate(double annual_rate);

/// Earliest birth year that receives at least one observed period rate:
/// the first data year minus the top of the oldest band (85+ spans 85..89
/// for this purpose).
int earliest_data_cohort(const MortalityDataset& data);

/// Curves for cohorts earliest_data_cohort..last_cohort. The hazard at age a
/// for cohort c is the hazard of the rate observed for a's band in year
/// c + a, extrapolated flat outside the data years.
MortalityCurves calibrate_mortality(const MortalityDataset& data, int last_cohort);

/// Adds copies of the earliest stored cohort for every birth year from
/// `first_requested` up to it.
MortalityCurves backfill_cohorts(MortalityCurves curves, int first_requested);

double death_probability(const MortalityCurve& curve, int age, double dt);

}  // namespace demosim
