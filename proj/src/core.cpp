#include "demosim/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "demosim/data.hpp"
#include "demosim/random.hpp"

namespace demosim {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "\n";
    out += i;
  }
  return out;
}

}  // namespace

DataError::DataError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

SimDate SimDate::containing(int calendar_year, int month) {
  if (month < 1 || month > 12) throw DomainError("month must be in 1..12");
  if (month >= 7) return SimDate(calendar_year, (month - 7) / 3);
  return SimDate(calendar_year - 1, 2 + (month - 1) / 3);
}

SimDate SimDate::parse(std::string_view text) {
  int y = 0, m = 0, d = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || d < 1 || d > 31)
    throw DomainError("malformed date '" + s + "', expected YYYY-MM-DD");
  return containing(y, m);
}

std::string SimDate::to_string() const {
  static constexpr int kMonth[4] = {7, 10, 1, 4};
  const int cal_year = year() + (quarter() >= 2 ? 1 : 0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-01", cal_year, kMonth[quarter()]);
  return buf;
}

std::string_view sex_code(Sex s) { return s == Sex::Female ? "F" : "M"; }

Sex parse_sex(std::string_view code) {
  if (code == "F") return Sex::Female;
  if (code == "M") return Sex::Male;
  throw DomainError("sex must be F or M, got '" + std::string(code) + "'");
}

AgeGroup AgeGroup::parse(std::string_view label) {
  if (label == "85+") return AgeGroup(kCount - 1);
  const auto dash = label.find('-');
  if (dash == std::string_view::npos) throw DomainError("bad age group '" + std::string(label) + "'");
  int lo = -1, hi = -1;
  std::from_chars(label.data(), label.data() + dash, lo);
  std::from_chars(label.data() + dash + 1, label.data() + label.size(), hi);
  if (lo < 0 || lo % kWidth != 0 || hi != lo + kWidth - 1 || lo / kWidth >= kCount - 1)
    throw DomainError("bad age group '" + std::string(label) + "'");
  return AgeGroup(lo / kWidth);
}

std::string AgeGroup::label() const {
  if (open_ended()) return "85+";
  return std::to_string(lower()) + "-" + std::to_string(lower() + kWidth - 1);
}

std::string_view aggregate_name(EthnicAggregate a) {
  switch (a) {
    case EthnicAggregate::NativeBritish: return "native-british";
    case EthnicAggregate::EUImmigrant: return "eu-immigrant";
    case EthnicAggregate::Other: return "other";
  }
  return "?";
}

EthnicCodebook::EthnicCodebook(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty() || names_.size() > 254) throw DomainError("codebook must have 1..254 groups");
  for (const auto& n : names_) {
    if (n == kWhiteBritish || n == kIrish)
      aggregates_.push_back(EthnicAggregate::NativeBritish);
    else if (n == kOtherWhite)
      aggregates_.push_back(EthnicAggregate::EUImmigrant);
    else
      aggregates_.push_back(EthnicAggregate::Other);
  }
}

EthnicCodebook EthnicCodebook::ons2011() {
  return EthnicCodebook({"White British", "Irish", "Gypsy or Irish Traveller", "Other White",
                         "White and Black Caribbean", "White and Black African",
                         "White and Asian", "Other Mixed", "Indian", "Pakistani",
                         "Bangladeshi", "Chinese", "Other Asian", "African", "Caribbean",
                         "Other Black", "Arab", "Other ethnic group"});
}

std::optional<EthnicGroup> EthnicCodebook::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return EthnicGroup{static_cast<std::uint8_t>(i)};
  return std::nullopt;
}

EthnicGroup EthnicCodebook::at(std::string_view name) const {
  if (auto g = find(name)) return *g;
  throw DomainError("unknown ethnic group '" + std::string(name) + "'");
}

int age_of(const Person& person, SimDate date) {
  const int q = date - person.birth;
  if (q < 0) throw DomainError("age queried before birth of person " + std::to_string(person.id));
  return q / 4;
}

SAEKey sae_key(const Person& person, SimDate date) {
  return SAEKey{person.sex, AgeGroup::of_age(age_of(person, date)), person.ethnicity};
}

SAEKey CellIndexer::key(int index) const {
  const int eth = index % ethnic_count_;
  const int rest = index / ethnic_count_;
  return SAEKey{static_cast<Sex>(rest / AgeGroup::kCount), AgeGroup(rest % AgeGroup::kCount),
                EthnicGroup{static_cast<std::uint8_t>(eth)}};
}

PersonId Population::add(Person person) {
  person.id = next_id();
  if (person.residence == Residence::Living) ++living_;
  if (person.residence == Residence::Pool) ++pool_;
  if (person.residence != Residence::Dead) active_.push_back(person.id);
  persons_.push_back(person);
  return person.id;
}

const Person& Population::at(PersonId id) const {
  if (!contains(id)) throw DomainError("unknown person id " + std::to_string(id));
  return persons_[id];
}

std::vector<PersonId> Population::living_ids() const {
  std::vector<PersonId> out;
  out.reserve(living_);
  for (PersonId id : active_)
    if (persons_[id].residence == Residence::Living) out.push_back(id);
  return out;
}

std::vector<PersonId> Population::pool_ids() const {
  std::vector<PersonId> out;
  out.reserve(pool_);
  for (PersonId id : active_)
    if (persons_[id].residence == Residence::Pool) out.push_back(id);
  return out;
}

void Population::move_to_pool(PersonId id) {
  Person& p = persons_.at(id);
  if (p.residence != Residence::Living)
    throw DomainError("person " + std::to_string(id) + " is not in the living population");
  p.residence = Residence::Pool;
  --living_;
  ++pool_;
}

void Population::move_to_living(PersonId id) {
  Person& p = persons_.at(id);
  if (p.residence != Residence::Pool)
    throw DomainError("person " + std::to_string(id) + " is not in the emigrant pool");
  p.residence = Residence::Living;
  --pool_;
  ++living_;
}

void Population::mark_dead(PersonId id) {
  Person& p = persons_.at(id);
  if (p.residence == Residence::Living) --living_;
  else if (p.residence == Residence::Pool) --pool_;
  else throw DomainError("person " + std::to_string(id) + " is already dead");
  p.residence = Residence::Dead;
  p.delivery_due.reset();
}

void Population::compact() {
  std::erase_if(active_, [this](PersonId id) { return persons_[id].residence == Residence::Dead; });
}

Population build_initial_population(const CensusTable& census, const EthnicCodebook& codebook,
                                    int census_year, SimDate date, std::int64_t target_size,
                                    std::uint64_t seed) {
  if (target_size <= 0) throw DomainError("target population size must be positive");
  if (!census.has_year(census_year))
    throw DataError({"census has no rows for " + std::to_string(census_year)});
  const auto& cells = census.cells(census_year);
  std::int64_t total = 0;
  for (auto c : cells) {
    if (c < 0) throw DataError({"negative census count in " + std::to_string(census_year)});
    total += c;
  }
  if (total == 0) throw DataError({"census " + std::to_string(census_year) + " is empty"});

  // Largest-remainder apportionment of target_size over the cells.
  const auto n_cells = cells.size();
  std::vector<std::int64_t> alloc(n_cells);
  std::vector<std::pair<long double, std::size_t>> remainders;
  remainders.reserve(n_cells);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n_cells; ++i) {
    const long double exact =
        static_cast<long double>(cells[i]) * target_size / static_cast<long double>(total);
    alloc[i] = static_cast<std::int64_t>(std::floor(exact));
    assigned += alloc[i];
    remainders.emplace_back(exact - alloc[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t k = 0; k < target_size - assigned; ++k) ++alloc[remainders[k].second];

  Population pop(static_cast<double>(total) / static_cast<double>(target_size));
  const CellIndexer& idx = census.indexer();
  if (idx.ethnic_count() != codebook.size())
    throw DataError({"census ethnicity count does not match the codebook"});
  for (std::size_t i = 0; i < n_cells; ++i) {
    const SAEKey key = idx.key(static_cast<int>(i));
    const int lo_q = key.age_group.lower() * 4;
    const int hi_q = (key.age_group.open_ended() ? 100 : *key.age_group.upper()) * 4;
    for (std::int64_t k = 0; k < alloc[i]; ++k) {
      const PersonId id = pop.next_id();
      RandomStream rng(seed, id, 0, Purpose::InitialAge);
      const int age_q = lo_q + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi_q - lo_q)));
      Person p;
      p.sex = key.sex;
      p.ethnicity = key.ethnicity;
      p.birth = date - age_q;
      pop.add(p);
    }
  }
  return pop;
}

}  // namespace demosim
