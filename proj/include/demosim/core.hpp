// Domain types shared by every part of the simulation: calendar steps,
// sex/age/ethnicity cells, persons and the population registry.
#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace demosim {

/// Raised when an operation is called outside its mathematical domain
/// (negative ages, males asked for conception, undefined logarithms...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by ingestion/validation. Carries every offending row.
class DataError : public std::runtime_error {
 public:
  explicit DataError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Raised when a calibration cannot produce a finite model for a cell.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quarter-resolution calendar point. Quarter 0 of `year` begins on
/// 1 July of that calendar year, quarter 1 on 1 October, quarter 2 on
/// 1 January of year+1 and quarter 3 on 1 April of year+1.
class SimDate {
 public:
  constexpr SimDate() = default;
  constexpr SimDate(int year, int quarter) : q_(year * 4 + quarter) {
    if (quarter < 0 || quarter > 3) throw DomainError("quarter must be in 0..3");
  }
  static constexpr SimDate from_quarters(int q) {
    SimDate d;
    d.q_ = q;
    return d;
  }
  /// The quarter containing the given calendar day (month 1..12).
  static SimDate containing(int calendar_year, int month);
  /// Parses "YYYY-MM-DD" and returns the containing quarter.
  static SimDate parse(std::string_view text);

  constexpr int year() const { return q_ >= 0 ? q_ / 4 : -((-q_ + 3) / 4); }
  constexpr int quarter() const { return q_ - year() * 4; }
  constexpr int quarters() const { return q_; }
  constexpr bool is_mid_year() const { return quarter() == 0; }

  constexpr SimDate operator+(int quarters) const { return from_quarters(q_ + quarters); }
  constexpr SimDate operator-(int quarters) const { return from_quarters(q_ - quarters); }
  friend constexpr int operator-(SimDate a, SimDate b) { return a.q_ - b.q_; }
  friend constexpr auto operator<=>(SimDate, SimDate) = default;

  /// First calendar day of the quarter, "YYYY-MM-DD".
  std::string to_string() const;

 private:
  int q_ = 0;
};

enum class Sex : std::uint8_t { Female = 0, Male = 1 };
inline constexpr int kSexCount = 2;
std::string_view sex_code(Sex s);  // "F" / "M"
Sex parse_sex(std::string_view code);

/// Five-year age band; index 17 is the open-ended 85+ band.
class AgeGroup {
 public:
  static constexpr int kCount = 18;
  static constexpr int kWidth = 5;

  constexpr AgeGroup() = default;
  explicit constexpr AgeGroup(int index) : index_(index) {
    if (index < 0 || index >= kCount) throw DomainError("age group index out of range");
  }
  static constexpr AgeGroup of_age(int age) {
    if (age < 0) throw DomainError("negative age");
    return AgeGroup(age / kWidth < kCount ? age / kWidth : kCount - 1);
  }
  static AgeGroup parse(std::string_view label);

  constexpr int index() const { return index_; }
  constexpr int lower() const { return index_ * kWidth; }
  /// Exclusive upper bound; nullopt for the open 85+ band.
  constexpr std::optional<int> upper() const {
    if (index_ == kCount - 1) return std::nullopt;
    return lower() + kWidth;
  }
  constexpr bool open_ended() const { return index_ == kCount - 1; }
  std::string label() const;

  friend constexpr auto operator<=>(AgeGroup, AgeGroup) = default;

 private:
  int index_ = 0;
};

enum class EthnicAggregate : std::uint8_t { NativeBritish, EUImmigrant, Other };
std::string_view aggregate_name(EthnicAggregate a);

struct EthnicGroup {
  std::uint8_t code = 0;
  friend constexpr auto operator<=>(EthnicGroup, EthnicGroup) = default;
};

/// Data-driven list of ethnic group names. The aggregate of each group is
/// derived from its name.
class EthnicCodebook {
 public:
  EthnicCodebook() = default;
  explicit EthnicCodebook(std::vector<std::string> names);
  /// The 18 groups of the 2011 census classification for England & Wales.
  static EthnicCodebook ons2011();

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(EthnicGroup g) const { return names_.at(g.code); }
  EthnicAggregate aggregate(EthnicGroup g) const { return aggregates_.at(g.code); }
  std::optional<EthnicGroup> find(std::string_view name) const;
  EthnicGroup at(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const EthnicCodebook&, const EthnicCodebook&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<EthnicAggregate> aggregates_;
};

inline constexpr std::string_view kWhiteBritish = "White British";
inline constexpr std::string_view kIrish = "Irish";
inline constexpr std::string_view kOtherWhite = "Other White";

using PersonId = std::uint32_t;
inline constexpr PersonId kNoPerson = std::numeric_limits<PersonId>::max();

enum class Residence : std::uint8_t { Living, Pool, Dead };

struct Person {
  PersonId id = kNoPerson;
  Sex sex = Sex::Female;
  EthnicGroup ethnicity;
  Residence residence = Residence::Living;
  SimDate birth;
  PersonId mother = kNoPerson;
  std::optional<SimDate> immigrated;
  std::optional<SimDate> last_childbirth;
  /// Scheduled delivery of a pending pregnancy.
  std::optional<SimDate> delivery_due;

  /// Cohort: the July-based year of birth.
  int birth_year() const { return birth.year(); }
  bool pregnant_at(SimDate date) const { return delivery_due && *delivery_due > date; }
};

/// Whole years elapsed, rounded down. Throws DomainError before birth.
int age_of(const Person& person, SimDate date);

struct SAEKey {
  Sex sex = Sex::Female;
  AgeGroup age_group;
  EthnicGroup ethnicity;
  friend constexpr auto operator<=>(const SAEKey&, const SAEKey&) = default;
};

SAEKey sae_key(const Person& person, SimDate date);

/// Dense numbering of the 2 x 18 x E cells.
class CellIndexer {
 public:
  explicit CellIndexer(int ethnic_count) : ethnic_count_(ethnic_count) {}
  int ethnic_count() const { return ethnic_count_; }
  int size() const { return kSexCount * AgeGroup::kCount * ethnic_count_; }
  int index(const SAEKey& key) const {
    return (static_cast<int>(key.sex) * AgeGroup::kCount + key.age_group.index()) *
               ethnic_count_ +
           key.ethnicity.code;
  }
  int index(Sex sex, int age_group, EthnicGroup eth) const {
    return (static_cast<int>(sex) * AgeGroup::kCount + age_group) * ethnic_count_ + eth.code;
  }
  SAEKey key(int index) const;

  friend bool operator==(const CellIndexer&, const CellIndexer&) = default;

 private:
  int ethnic_count_;
};

/// Registry of every person ever simulated. Ids are dense and never
/// recycled, so `persons[id]` is a stable lookup; the dead stay in the
/// registry so mother links always resolve.
class Population {
 public:
  explicit Population(double scale_factor = 10.0) : scale_factor_(scale_factor) {}

  /// Simulated-to-real person ratio.
  double scale_factor() const { return scale_factor_; }
  void set_scale_factor(double s) { scale_factor_ = s; }

  /// Registers a person with a fresh id (the id field is overwritten).
  PersonId add(Person person);

  const Person& operator[](PersonId id) const { return persons_[id]; }
  Person& operator[](PersonId id) { return persons_[id]; }
  const Person& at(PersonId id) const;
  bool contains(PersonId id) const { return id < persons_.size(); }

  std::size_t living_size() const { return living_; }
  std::size_t pool_size() const { return pool_; }
  std::size_t registry_size() const { return persons_.size(); }
  PersonId next_id() const { return static_cast<PersonId>(persons_.size()); }

  /// Ids of everyone alive (living or in the emigrant pool), ascending.
  /// May contain persons that died since the last `compact()`.
  std::span<const PersonId> active() const { return active_; }

  std::vector<PersonId> living_ids() const;
  std::vector<PersonId> pool_ids() const;

  void move_to_pool(PersonId id);
  void move_to_living(PersonId id);
  void mark_dead(PersonId id);
  /// Drops dead persons from the active list.
  void compact();

  template <typename F>
  void for_each_living(F&& f) const {
    for (PersonId id : active_)
      if (persons_[id].residence == Residence::Living) f(persons_[id]);
  }

 private:
  std::vector<Person> persons_;
  std::vector<PersonId> active_;
  std::size_t living_ = 0;
  std::size_t pool_ = 0;
  double scale_factor_;
};

class CensusTable;

/// Allocates `target_size` persons across the 1991 census cells in
/// proportion to the census counts (largest-remainder rounding), with ages
/// uniform in each band (85+ uniform on [85, 100)).
Population build_initial_population(const CensusTable& census, const EthnicCodebook& codebook,
                                    int census_year, SimDate date, std::int64_t target_size,
                                    std::uint64_t seed);

}  // namespace demosim
