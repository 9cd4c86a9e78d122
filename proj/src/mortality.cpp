#include "demosim/mortality.hpp"

#include <cmath>
#include <limits>

#include "demosim/csv.hpp"

namespace demosim {

void MortalityCurves::insert(MortalityCurve curve) {
  if (curve.hazard.size() != static_cast<std::size_t>(kAgeCount))
    throw DomainError("mortality curve must cover ages 0.." + std::to_string(kMaxAge));
  const int by = curve.birth_year;
  curves_[static_cast<int>(curve.sex)].insert_or_assign(by, std::move(curve));
}

bool MortalityCurves::contains(Sex sex, int birth_year) const {
  return curves_[static_cast<int>(sex)].contains(birth_year);
}

const MortalityCurve& MortalityCurves::curve(Sex sex, int birth_year) const {
  const auto& m = curves_[static_cast<int>(sex)];
  if (m.empty()) throw DomainError("no mortality curves for this sex");
  auto it = m.lower_bound(birth_year);
  if (it == m.end()) return std::prev(it)->second;
  if (it->first != birth_year && it != m.begin()) {
    // Gaps do not occur in calibrated sets; prefer the earlier neighbour.
    return std::prev(it)->second;
  }
  return it->second;
}

int MortalityCurves::first_cohort() const {
  if (empty()) throw DomainError("no mortality curves");
  int first = std::numeric_limits<int>::max();
  for (const auto& m : curves_)
    if (!m.empty()) first = std::min(first, m.begin()->first);
  return first;
}

int MortalityCurves::last_cohort() const {
  if (empty()) throw DomainError("no mortality curves");
  int last = std::numeric_limits<int>::min();
  for (const auto& m : curves_)
    if (!m.empty()) last = std::max(last, m.rbegin()->first);
  return last;
}

std::vector<MortalityCurve> MortalityCurves::all() const {
  std::vector<MortalityCurve> out;
  for (const auto& m : curves_)
    for (const auto& [_, c] : m) out.push_back(c);
  return out;
}

double mortality_hazard_from_rate(double annual_rate) {
  if (!(annual_rate >= 0.0) || annual_rate > 1.0) throw DomainError("mortality rate outside [0, 1]");
  if (annual_rate == 1.0) throw DomainError("mortality rate of 1 has an infinite hazard");
  return -std::log1p(-annual_rate);
}

int earliest_data_cohort(const MortalityDataset& data) {
  const int first_year = data.rates.axis(Dim::Year).values.front();
  return first_year - (AgeGroup(AgeGroup::kCount - 1).lower() + AgeGroup::kWidth - 1);
}

MortalityCurves calibrate_mortality(const MortalityDataset& data, int last_cohort) {
  // Hazards per data cell first, so a q of 1 is reported once by cell.
  RateTable hazards(data.rates.axes());
  for (const auto& [c, q] : data.rates.cells()) {
    try {
      hazards.set(c, mortality_hazard_from_rate(q));
    } catch (const DomainError&) {
      throw CalibrationError("mortality calibration failed for sex " +
                             std::string(sex_code(static_cast<Sex>(*c.get(Dim::Sex)))) +
                             ", age group " + AgeGroup(*c.get(Dim::AgeGroup)).label() + ", year " +
                             std::to_string(*c.get(Dim::Year)) + ": rate " + csv::format_double(q));
    }
  }
  MortalityCurves out;
  const int first = earliest_data_cohort(data);
  for (int s = 0; s < kSexCount; ++s) {
    const Sex sex = static_cast<Sex>(s);
    for (int cohort = first; cohort <= last_cohort; ++cohort) {
      MortalityCurve curve{sex, cohort, std::vector<double>(kAgeCount)};
      for (int age = 0; age <= kMaxAge; ++age)
        curve.hazard[static_cast<std::size_t>(age)] =
            hazards.lookup_flat(Coords().sex(sex).age_group(AgeGroup::of_age(age)).year(cohort + age));
      out.insert(std::move(curve));
    }
  }
  return out;
}

MortalityCurves backfill_cohorts(MortalityCurves curves, int first_requested) {
  if (curves.empty()) throw DomainError("no mortality curves to backfill from");
  const int earliest = curves.first_cohort();
  for (int s = 0; s < kSexCount; ++s) {
    const Sex sex = static_cast<Sex>(s);
    if (!curves.contains(sex, earliest)) continue;
    const MortalityCurve source = curves.curve(sex, earliest);
    for (int cohort = first_requested; cohort < earliest; ++cohort) {
      MortalityCurve copy = source;
      copy.birth_year = cohort;
      curves.insert(std::move(copy));
    }
  }
  return curves;
}

double death_probability(const MortalityCurve& curve, int age, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  return -std::expm1(-curve.hazard_at(age) * dt);
}

}  // namespace demosim
