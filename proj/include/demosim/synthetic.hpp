// A deterministic synthetic stand-in for the England & Wales inputs.
//
// Rates follow simple parametric shapes (Gompertz mortality with
// improvement, cohort fertility schedules drifting later and lower). The
// 2001 and 2011 censuses come from a single-year cohort-component
// projection of the 1991 census with designed net migration, so migration
// calibration has something known to find.
#pragma once

#include "demosim/data.hpp"

namespace demosim {

struct SyntheticMigration {
  /// Other White net inflow per year, before and from 2004.
  double other_white_early = 25000;
  double other_white_late = 130000;
  double other_white_female_share = 0.55;
  /// Combined net inflow of the non-white groups per year.
  double other_groups = 100000;
  /// Irish net flow per year (negative: outflow).
  double irish = -3000;
  /// White British relative net flow per year at ages 20-69.
  double white_british_rate = -0.0015;
};

Dataset synthetic_dataset(const SyntheticMigration& migration = {});

}  // namespace demosim
