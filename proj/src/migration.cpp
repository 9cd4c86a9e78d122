#include "demosim/migration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "demosim/csv.hpp"
#include "demosim/data.hpp"

namespace demosim {

std::string_view law_name(MigrationLaw law) {
  return law == MigrationLaw::Absolute ? "absolute" : "relative";
}

MigrationLaw parse_law(std::string_view name) {
  if (name == "absolute") return MigrationLaw::Absolute;
  if (name == "relative") return MigrationLaw::Relative;
  throw DomainError("unknown migration law '" + std::string(name) + "'");
}

std::string base_band_label(int base_band) {
  if (base_band < 0 || base_band >= kBaseBands) throw DomainError("base band out of range");
  if (base_band == kBaseBands - 1) return "75+";
  return AgeGroup(base_band).label();
}

int parse_base_band(std::string_view label) {
  if (label == "75+") return kBaseBands - 1;
  const int b = AgeGroup::parse(label).index();
  if (b >= kBaseBands - 1) throw DomainError("bad base age group '" + std::string(label) + "'");
  return b;
}

int elapsed_years(int decade_start, SimDate date) { return (date - SimDate(decade_start, 0)) / 4; }

AgeRange cohort_age_range(int base_band, int decade_start, SimDate date) {
  const int e = elapsed_years(decade_start, date);
  if (base_band == kBaseBands - 1) return {75 + e, std::nullopt};
  return {base_band * 5 + e, base_band * 5 + 5 + e};
}

AgeRange post_census_age_range(int base_band) {
  const int shift = kReferenceYear - kDecadeStarts[1];
  if (base_band == kBaseBands - 1) return {75 + shift, std::nullopt};
  return {base_band * 5 + shift, base_band * 5 + 5 + shift};
}

std::optional<int> migration_base_band(int age, SimDate date) {
  const SimDate first(kFirstCensusYear, 0);
  const SimDate last(kLastCensusYear, 0);
  if (date < first) return std::nullopt;
  int reference_age;
  if (date < last) {
    const int decade = date < SimDate(kDecadeStarts[1], 0) ? kDecadeStarts[0] : kDecadeStarts[1];
    reference_age = age - elapsed_years(decade, date);
  } else {
    reference_age = age - (kReferenceYear - kDecadeStarts[1]);
  }
  if (reference_age < 0) return std::nullopt;
  return std::min(reference_age / 5, kBaseBands - 1);
}

MigrationSchedule::MigrationSchedule(int ethnic_count) : ethnic_count_(ethnic_count) {
  rates_.resize(static_cast<std::size_t>(kDecadeStarts.size() * kSexCount * ethnic_count * kBaseBands));
  for (int d : kDecadeStarts)
    for (int s = 0; s < kSexCount; ++s)
      for (int e = 0; e < ethnic_count; ++e)
        for (int b = 0; b < kBaseBands; ++b) {
          const CohortKey key{static_cast<Sex>(s), EthnicGroup{static_cast<std::uint8_t>(e)}, b, d};
          rates_[slot(key)] = CohortMigrationRate{key, MigrationLaw::Absolute, 0.0};
        }
}

std::size_t MigrationSchedule::slot(const CohortKey& key) const {
  int d = -1;
  for (std::size_t i = 0; i < kDecadeStarts.size(); ++i)
    if (kDecadeStarts[i] == key.decade_start) d = static_cast<int>(i);
  if (d < 0 || key.base_band < 0 || key.base_band >= kBaseBands || key.ethnicity.code >= ethnic_count_)
    throw DomainError("cohort key outside the migration schedule");
  return static_cast<std::size_t>(
      ((d * kSexCount + static_cast<int>(key.sex)) * ethnic_count_ + key.ethnicity.code) * kBaseBands +
      key.base_band);
}

const CohortMigrationRate& MigrationSchedule::rate(const CohortKey& key) const { return rates_[slot(key)]; }

void MigrationSchedule::set(const CohortMigrationRate& rate) { rates_[slot(rate.cohort)] = rate; }

std::vector<CohortMigrationRate> MigrationSchedule::entries() const { return rates_; }

CohortMigrationRate MigrationSchedule::baseline(Sex sex, EthnicGroup eth, int base_band,
                                                SimDate date) const {
  const int decade = date < SimDate(kDecadeStarts[1], 0) ? kDecadeStarts[0] : kDecadeStarts[1];
  return rate(CohortKey{sex, eth, base_band, decade});
}

void MigrationSchedule::save(const std::filesystem::path& file, const EthnicCodebook& book) const {
  csv::Writer w(file, "sex,ethnicity,base_age_group,decade_start,law,k");
  for (const auto& r : rates_) {
    w.field(sex_code(r.cohort.sex))
        .field(book.name(r.cohort.ethnicity))
        .field(base_band_label(r.cohort.base_band))
        .field(r.cohort.decade_start)
        .field(law_name(r.law))
        .field(r.k);
    w.end_row();
  }
}

MigrationSchedule MigrationSchedule::load(const std::filesystem::path& file, const EthnicCodebook& book) {
  auto t = csv::read(file, "sex,ethnicity,base_age_group,decade_start,law,k");
  MigrationSchedule s(book.size());
  std::vector<std::string> issues;
  for (const auto& r : t.rows) {
    const std::string where = file.filename().string() + ":" + std::to_string(r.line) + ": ";
    if (r.fields.size() != 6) {
      issues.push_back(where + "expected 6 fields");
      continue;
    }
    try {
      std::int64_t decade;
      double k;
      if (!csv::parse_int(r.fields[3], decade)) throw DomainError("bad decade_start");
      if (!csv::parse_double(r.fields[5], k) || !std::isfinite(k)) throw DomainError("bad k");
      s.set(CohortMigrationRate{CohortKey{parse_sex(r.fields[0]), book.at(r.fields[1]),
                                          parse_base_band(r.fields[2]), static_cast<int>(decade)},
                                parse_law(r.fields[4]), k});
    } catch (const DomainError& e) {
      issues.push_back(where + e.what());
    }
  }
  if (!issues.empty()) throw DataError(std::move(issues));
  return s;
}

double estimate_net_migration(double sim_start, double census_start, double sim_end,
                              double census_end) {
  return (census_end - census_start) - (sim_end - sim_start);
}

MigrationLaw select_law(EthnicAggregate aggregate, double net_migration) {
  if (aggregate == EthnicAggregate::NativeBritish && net_migration < 0.0) return MigrationLaw::Relative;
  return MigrationLaw::Absolute;
}

double rate_from_delta(double dm, double n, double dt, MigrationLaw law) {
  if (!(dt > 0.0)) throw DomainError("migration period must be positive");
  if (law == MigrationLaw::Absolute) return dm / dt;
  if (!(n > 0.0)) throw DomainError("relative migration rate needs a positive group size");
  if (dm <= -n) throw DomainError("relative migration rate undefined: emigration exceeds the group");
  return std::log1p(dm / n) / dt;
}

double apply_rate(double k, MigrationLaw law, double n, double dt) {
  if (law == MigrationLaw::Absolute) return std::max(k * dt, -n);
  return n * std::expm1(k * dt);
}

std::vector<PersonId> select_migrants(const Population& pop, std::span<const PersonId> members,
                                      std::size_t count, SelectionMode mode, RandomStream& rng) {
  if (count > members.size())
    throw DomainError("cannot select " + std::to_string(count) + " migrants from a group of " +
                      std::to_string(members.size()));
  std::vector<PersonId> pool(members.begin(), members.end());
  if (mode == SelectionMode::LIFO) {
    auto later = [&pop](PersonId a, PersonId b) {
      const auto& da = pop[a].immigrated;
      const auto& db = pop[b].immigrated;
      if (da != db) {
        if (!da) return false;
        if (!db) return true;
        return *da > *db;
      }
      return a > b;
    };
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count), pool.end(), later);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
  }
  pool.resize(count);
  return pool;
}

FamilyIndex::FamilyIndex(const Population& pop, SimDate date) {
  std::vector<std::pair<PersonId, PersonId>> links;
  for (PersonId id : pop.active()) {
    const Person& p = pop[id];
    if (p.residence == Residence::Dead || p.mother == kNoPerson) continue;
    if (date - p.birth < kCoMigrationAge * 4) links.emplace_back(p.mother, id);
  }
  std::sort(links.begin(), links.end());
  mothers_.reserve(links.size());
  children_.reserve(links.size());
  for (const auto& [m, c] : links) {
    mothers_.push_back(m);
    children_.push_back(c);
  }
}

std::span<const PersonId> FamilyIndex::children_of(PersonId mother) const {
  const auto [lo, hi] = std::equal_range(mothers_.begin(), mothers_.end(), mother);
  return std::span<const PersonId>(children_).subspan(
      static_cast<std::size_t>(lo - mothers_.begin()), static_cast<std::size_t>(hi - lo));
}

Moves emigrate(Population& pop, std::span<const PersonId> persons, const FamilyIndex& families) {
  Moves moves;
  for (PersonId id : persons) {
    if (pop.at(id).residence != Residence::Living)
      throw DomainError("person " + std::to_string(id) + " is not in the living population");
  }
  for (PersonId id : persons) {
    if (pop[id].residence != Residence::Living) continue;  // already left as someone's child
    pop.move_to_pool(id);
    moves.principals.push_back(id);
    for (PersonId child : families.children_of(id)) {
      if (pop[child].residence != Residence::Living) continue;
      pop.move_to_pool(child);
      moves.children.push_back(child);
    }
  }
  return moves;
}

Moves emigrate(Population& pop, std::span<const PersonId> persons, SimDate date) {
  return emigrate(pop, persons, FamilyIndex(pop, date));
}

Moves return_from_pool(Population& pop, std::span<const PersonId> persons,
                       const FamilyIndex& families, SimDate date) {
  Moves moves;
  for (PersonId id : persons) {
    if (pop.at(id).residence != Residence::Pool) continue;
    pop.move_to_living(id);
    pop[id].immigrated = date;
    moves.principals.push_back(id);
    for (PersonId child : families.children_of(id)) {
      if (pop[child].residence != Residence::Pool) continue;
      pop.move_to_living(child);
      pop[child].immigrated = date;
      moves.children.push_back(child);
    }
  }
  return moves;
}

Moves immigrate(Population& pop, const MigrantCell& cell, std::span<const PersonId> templates,
                std::int64_t count, SimDate date, const FamilyIndex& families, RandomStream& rng) {
  Moves moves;
  if (count <= 0) return moves;
  for (std::int64_t i = 0; i < count; ++i) {
    if (templates.empty()) {
      const int lo_q = cell.ages.lo * 4;
      const int hi_q = (cell.ages.hi ? *cell.ages.hi : std::max(cell.ages.lo + 5, 100)) * 4;
      Person p;
      p.sex = cell.sex;
      p.ethnicity = cell.ethnicity;
      p.birth = date - (lo_q + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi_q - lo_q))));
      p.immigrated = date;
      moves.principals.push_back(pop.add(p));
      continue;
    }
    const PersonId tid = templates[static_cast<std::size_t>(rng.below(templates.size()))];
    Person clone;
    {
      const Person& t = pop[tid];
      clone.sex = t.sex;
      clone.ethnicity = t.ethnicity;
      clone.birth = t.birth;
      clone.last_childbirth = t.last_childbirth;
    }
    clone.immigrated = date;
    const PersonId cid = pop.add(clone);
    moves.principals.push_back(cid);
    for (PersonId child : families.children_of(tid)) {
      if (pop[child].residence != Residence::Living) continue;
      Person c;
      c.sex = pop[child].sex;
      c.ethnicity = pop[child].ethnicity;
      c.birth = pop[child].birth;
      c.mother = cid;
      c.immigrated = date;
      moves.children.push_back(pop.add(c));
    }
  }
  return moves;
}

Moves immigrate(Population& pop, const SAEKey& cell, std::int64_t count, SimDate date,
                RandomStream& rng) {
  std::vector<PersonId> templates;
  pop.for_each_living([&](const Person& p) {
    if (sae_key(p, date) == cell) templates.push_back(p.id);
  });
  const AgeGroup g = cell.age_group;
  MigrantCell mc{cell.sex, cell.ethnicity,
                 AgeRange{g.lower(), g.open_ended() ? std::optional<int>(100) : g.upper()}};
  return immigrate(pop, mc, templates, count, date, FamilyIndex(pop, date), rng);
}

}  // namespace demosim
