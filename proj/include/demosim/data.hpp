// Historical rate tables, their flat-extrapolation lookup, and loading of
// the dataset directory.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "demosim/core.hpp"

namespace demosim {

enum class Dim : std::uint8_t { Year = 0, BirthYear, Sex, AgeGroup, Ethnicity };
inline constexpr int kDimCount = 5;

/// Ethnicity coordinate used by the TFR table for the all-groups average.
inline constexpr int kAllEthnicities = 255;

struct Axis {
  Dim dim;
  /// Ascending. Flat axes must be contiguous integers.
  std::vector<int> values;
  /// Queries beyond the range take the nearest boundary value.
  bool flat = false;

  static Axis range(Dim dim, int first, int last, bool flat);

  friend bool operator==(const Axis&, const Axis&) = default;
};

class Coords {
 public:
  Coords& year(int v) { return set(Dim::Year, v); }
  Coords& birth_year(int v) { return set(Dim::BirthYear, v); }
  Coords& sex(Sex v) { return set(Dim::Sex, static_cast<int>(v)); }
  Coords& age_group(AgeGroup v) { return set(Dim::AgeGroup, v.index()); }
  Coords& ethnicity(int code) { return set(Dim::Ethnicity, code); }
  Coords& set(Dim d, int v) {
    values_[static_cast<int>(d)] = v;
    return *this;
  }
  std::optional<int> get(Dim d) const { return values_[static_cast<int>(d)]; }

  friend bool operator==(const Coords&, const Coords&) = default;

 private:
  std::array<std::optional<int>, kDimCount> values_{};
};

/// Dense table of non-negative rates over a subset of dimensions.
class RateTable {
 public:
  RateTable() = default;
  explicit RateTable(std::vector<Axis> axes);

  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(Dim d) const;
  bool has_axis(Dim d) const;

  /// Exact value inside the declared range; outside it on a flat axis, the
  /// nearest boundary cell. Throws DomainError if a dimension is missing or
  /// a categorical coordinate is not in the table.
  double lookup_flat(const Coords& c) const;
  /// Coordinates moved onto the declared range of every flat axis.
  Coords clamp(const Coords& c) const;
  /// True if every categorical coordinate is present in the table.
  bool covers(const Coords& c) const;

  void set(const Coords& c, double value);
  bool is_set(const Coords& c) const;

  std::size_t size() const { return cells_.size(); }
  /// Every cell with its coordinates, in storage order.
  std::vector<std::pair<Coords, double>> cells() const;

  friend bool operator==(const RateTable&, const RateTable&) = default;

 private:
  std::size_t offset(const Coords& c, bool clamp_flat) const;

  std::vector<Axis> axes_;
  std::vector<double> cells_;
};

struct FertilityDataset {
  RateTable birth_rates;   // age group x mother's birth year
  RateTable tfr;           // ethnicity x year (kAllEthnicities = E&W average)
  RateTable multiplicity;  // age group x year, probability of twins
  RateTable male_share;    // year

  friend bool operator==(const FertilityDataset&, const FertilityDataset&) = default;
};

struct MortalityDataset {
  RateTable rates;  // sex x age group x year, annual probability of death

  friend bool operator==(const MortalityDataset&, const MortalityDataset&) = default;
};

/// Population counts by census year and SAE cell.
class CensusTable {
 public:
  CensusTable() = default;
  explicit CensusTable(int ethnic_count) : indexer_(ethnic_count) {}

  const CellIndexer& indexer() const { return indexer_; }
  void set(int year, const SAEKey& key, std::int64_t count);
  void set_cells(int year, std::vector<std::int64_t> counts);
  std::int64_t count(int year, const SAEKey& key) const;
  bool has_year(int year) const { return years_.contains(year); }
  std::vector<int> years() const;
  std::int64_t total(int year) const;
  const std::vector<std::int64_t>& cells(int year) const;

  friend bool operator==(const CensusTable&, const CensusTable&) = default;

 private:
  CellIndexer indexer_{0};
  std::map<int, std::vector<std::int64_t>> years_;
};

inline constexpr std::array<int, 3> kCensusYears{1991, 2001, 2011};

struct Dataset {
  EthnicCodebook codebook;
  FertilityDataset fertility;
  MortalityDataset mortality;
  CensusTable census;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Loads and validates a dataset directory. Throws DataError listing every
/// offending row.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
/// Throws DataError if any invariant is violated.
void validate(const Dataset& data);

/// Loads a census file on its own (header `year,sex,age_group,ethnicity,count`).
CensusTable load_census(const std::filesystem::path& file, const EthnicCodebook& codebook);
void save_census(const CensusTable& census, const EthnicCodebook& codebook,
                 const std::filesystem::path& file);

}  // namespace demosim
