// Pregnancies as a non-homogeneous Poisson process with memory.
//
// The conception hazard is piecewise constant per (mother's 5-year age
// band, mother's birth year), scaled per ethnic group by its TFR relative to
// the England & Wales average. It is zero outside ages 15..50, during a
// pregnancy, and in the quarter of a delivery.
#pragma once

#include <vector>

#include "demosim/core.hpp"
#include "demosim/data.hpp"
#include "demosim/random.hpp"

namespace demosim {

struct PregnancyHazardModel {
  static constexpr int kMinAge = 15;
  static constexpr int kMaxAge = 50;
  /// Conception to delivery.
  static constexpr int kGestationQuarters = 3;
  /// Quarters after a delivery during which conception is impossible.
  static constexpr int kPostpartumQuarters = 1;

  RateTable base_hazard;      // age group x mother's birth year, per year
  RateTable ethnicity_scale;  // ethnicity x year; groups absent here scale by 1

  /// Annual hazard for a woman of the given cohort and age, before the
  /// exclusions. Zero outside the fertile ages.
  double hazard(int birth_year, int age, EthnicGroup ethnicity, int year) const;
  double scale(EthnicGroup ethnicity, int year) const;

  friend bool operator==(const PregnancyHazardModel&, const PregnancyHazardModel&) = default;
};

/// Annual conception hazard whose implied conception probability, inflated
/// by the expected number of children per delivery, equals `birth_rate`:
/// h = -ln(1 - r / (1 + twin_prob)).
double hazard_from_birth_rate(double birth_rate, double twin_prob);

/// Calendar year used for the twin probability of an (age band, cohort) cell.
int multiplicity_year(AgeGroup band, int birth_year);

PregnancyHazardModel calibrate_fertility(const FertilityDataset& data);

/// Probability of conceiving during [date, date + dt years).
double conception_probability(const PregnancyHazardModel& model, const Person& person,
                              SimDate date, double dt);

/// Newborns of a delivery (one, or two with the twin probability), each
/// male with the year's male share. Updates the mother's last childbirth and
/// clears her pending delivery. Newborns carry no id yet.
std::vector<Person> draw_birth_outcome(const FertilityDataset& data, Person& mother,
                                       SimDate birth_date, RandomStream& rng);

}  // namespace demosim
