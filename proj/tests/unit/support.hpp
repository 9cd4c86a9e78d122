// Fixtures shared by the unit tests. Everything heavy is built lazily once
// per process.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "demosim/calibration.hpp"
#include "demosim/data.hpp"
#include "demosim/kernel.hpp"
#include "demosim/synthetic.hpp"

namespace demosim::testing {

inline const Dataset& synth() {
  static const Dataset d = synthetic_dataset();
  return d;
}

inline const Models& vital_models() {
  static const Models m = calibrate_vital_models(synth());
  return m;
}

/// Vital models plus a migration schedule calibrated at a small size.
inline const Models& full_models() {
  static const Models m = [] {
    Models out = vital_models();
    out.migration = calibrate_migration(out, 20000, 7).schedule;
    return out;
  }();
  return m;
}

/// No deaths and no conceptions.
inline Models frozen_models() {
  Models m = vital_models();
  for (const auto& [c, v] : m.fertility.base_hazard.cells()) m.fertility.base_hazard.set(c, 0.0);
  MortalityCurves zero;
  for (auto c : m.mortality.all()) {
    std::fill(c.hazard.begin(), c.hazard.end(), 0.0);
    zero.insert(std::move(c));
  }
  m.mortality = std::move(zero);
  return m;
}

inline const EthnicCodebook& book() {
  static const EthnicCodebook b = EthnicCodebook::ons2011();
  return b;
}

inline Person make_person(Sex sex, SimDate birth, std::string_view eth = kWhiteBritish) {
  Person p;
  p.sex = sex;
  p.birth = birth;
  p.ethnicity = book().at(eth);
  return p;
}

/// A fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::mt19937_64 gen(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("demosim-test-" + name + "-" + std::to_string(gen() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace demosim::testing
