#include "demosim/fertility.hpp"

#include <cmath>
#include <set>

#include "demosim/csv.hpp"

namespace demosim {

double hazard_from_birth_rate(double birth_rate, double twin_prob) {
  if (!(birth_rate >= 0.0) || !(twin_prob >= 0.0) || twin_prob > 1.0)
    throw DomainError("birth rate and twin probability must be non-negative");
  const double conception = birth_rate / (1.0 + twin_prob);
  if (conception >= 1.0) throw DomainError("birth rate too high for a finite hazard");
  return -std::log1p(-conception);
}

int multiplicity_year(AgeGroup band, int birth_year) { return birth_year + band.lower() + 2; }

double PregnancyHazardModel::scale(EthnicGroup ethnicity, int year) const {
  Coords c;
  c.ethnicity(ethnicity.code).year(year);
  if (ethnicity_scale.size() == 0 || !ethnicity_scale.covers(c)) return 1.0;
  return ethnicity_scale.lookup_flat(c);
}

double PregnancyHazardModel::hazard(int birth_year, int age, EthnicGroup ethnicity, int year) const {
  if (age < kMinAge || age > kMaxAge) return 0.0;
  const double base =
      base_hazard.lookup_flat(Coords().age_group(AgeGroup::of_age(age)).birth_year(birth_year));
  return base * scale(ethnicity, year);
}

PregnancyHazardModel calibrate_fertility(const FertilityDataset& data) {
  PregnancyHazardModel model;
  model.base_hazard = RateTable(data.birth_rates.axes());
  for (const auto& [c, rate] : data.birth_rates.cells()) {
    const AgeGroup band(*c.get(Dim::AgeGroup));
    const int cohort = *c.get(Dim::BirthYear);
    const double twin =
        data.multiplicity.lookup_flat(Coords().age_group(band).year(multiplicity_year(band, cohort)));
    try {
      model.base_hazard.set(c, hazard_from_birth_rate(rate, twin));
    } catch (const DomainError&) {
      throw CalibrationError("fertility calibration failed for age group " + band.label() +
                             ", mother_birth_year " + std::to_string(cohort) + ": birth rate " +
                             csv::format_double(rate) + " >= 1 + twin_prob " +
                             csv::format_double(1.0 + twin));
    }
  }

  // TFR ratio of every listed group to the all-groups average.
  const auto& tfr = data.tfr;
  std::vector<int> groups;
  for (int e : tfr.axis(Dim::Ethnicity).values)
    if (e != kAllEthnicities) groups.push_back(e);
  if (groups.empty()) return model;
  const auto& years = tfr.axis(Dim::Year).values;
  model.ethnicity_scale =
      RateTable({Axis{Dim::Ethnicity, groups, false}, Axis::range(Dim::Year, years.front(), years.back(), true)});
  for (int e : groups) {
    for (int y : years) {
      const double avg = tfr.lookup_flat(Coords().ethnicity(kAllEthnicities).year(y));
      if (!(avg > 0.0))
        throw CalibrationError("fertility calibration failed: average TFR is zero in year " +
                               std::to_string(y));
      model.ethnicity_scale.set(Coords().ethnicity(e).year(y),
                                tfr.lookup_flat(Coords().ethnicity(e).year(y)) / avg);
    }
  }
  return model;
}

double conception_probability(const PregnancyHazardModel& model, const Person& person,
                              SimDate date, double dt) {
  if (person.sex != Sex::Female) throw DomainError("conception probability asked for a male");
  if (person.residence == Residence::Dead) return 0.0;
  if (person.pregnant_at(date)) return 0.0;
  if (person.last_childbirth &&
      date - *person.last_childbirth < PregnancyHazardModel::kPostpartumQuarters)
    return 0.0;
  const int age = age_of(person, date);
  const double h = model.hazard(person.birth_year(), age, person.ethnicity, date.year());
  return -std::expm1(-h * dt);
}

std::vector<Person> draw_birth_outcome(const FertilityDataset& data, Person& mother,
                                       SimDate birth_date, RandomStream& rng) {
  const AgeGroup band = AgeGroup::of_age(age_of(mother, birth_date));
  const int year = birth_date.year();
  const double twin = data.multiplicity.lookup_flat(Coords().age_group(band).year(year));
  const double male = data.male_share.lookup_flat(Coords().year(year));
  const int n = rng.uniform() < twin ? 2 : 1;
  std::vector<Person> out;
  for (int i = 0; i < n; ++i) {
    Person child;
    child.sex = rng.uniform() < male ? Sex::Male : Sex::Female;
    child.ethnicity = mother.ethnicity;
    child.residence = mother.residence;
    child.birth = birth_date;
    child.mother = mother.id;
    out.push_back(child);
  }
  mother.last_childbirth = birth_date;
  mother.delivery_due.reset();
  return out;
}

}  // namespace demosim
