#include "demosim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "demosim/random.hpp"

namespace demosim {

Models calibrate_vital_models(const Dataset& data) {
  Models m;
  m.codebook = data.codebook;
  m.fertility_data = data.fertility;
  m.fertility = calibrate_fertility(data.fertility);
  const int last_year = data.mortality.rates.axis(Dim::Year).values.back();
  m.mortality = calibrate_mortality(data.mortality, std::max(last_year, 2041));
  m.migration = MigrationSchedule(data.codebook.size());
  m.census = data.census;
  return m;
}

namespace {

// FNV-1a over the bytes of the numbers that define the models.
class Digest {
 public:
  void add(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h_ = (h_ ^ b[i]) * 0x100000001b3ull;
  }
  void add(double v) { add(&v, sizeof v); }
  void add(std::int64_t v) { add(&v, sizeof v); }
  void add(const RateTable& t) {
    for (const auto& [c, v] : t.cells()) {
      for (int d = 0; d < kDimCount; ++d) add(static_cast<std::int64_t>(c.get(static_cast<Dim>(d)).value_or(-1)));
      add(v);
    }
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace

std::string models_fingerprint(const Models& m) {
  Digest d;
  for (const auto& n : m.codebook.names()) d.add(n.data(), n.size());
  d.add(m.fertility_data.birth_rates);
  d.add(m.fertility_data.tfr);
  d.add(m.fertility_data.multiplicity);
  d.add(m.fertility_data.male_share);
  d.add(m.fertility.base_hazard);
  d.add(m.fertility.ethnicity_scale);
  for (const auto& c : m.mortality.all()) {
    d.add(static_cast<std::int64_t>(c.sex));
    d.add(static_cast<std::int64_t>(c.birth_year));
    for (double h : c.hazard) d.add(h);
  }
  for (const auto& r : m.migration.entries()) {
    d.add(static_cast<std::int64_t>(r.cohort.sex));
    d.add(static_cast<std::int64_t>(r.cohort.ethnicity.code));
    d.add(static_cast<std::int64_t>(r.cohort.base_band));
    d.add(static_cast<std::int64_t>(r.cohort.decade_start));
    d.add(static_cast<std::int64_t>(r.law));
    d.add(r.k);
  }
  for (int y : m.census.years())
    for (auto c : m.census.cells(y)) d.add(c);
  return d.hex();
}

const Snapshot* RunResult::snapshot_at(SimDate d) const {
  for (const auto& s : snapshots)
    if (s.date == d) return &s;
  return nullptr;
}

namespace {

constexpr double kStepYears = 0.25;
constexpr std::uint64_t kGroupEntity = std::uint64_t{1} << 40;
constexpr std::uint64_t kWaveEntity = std::uint64_t{1} << 41;

// Quarterly death probabilities by sex, cohort and single-year age.
class DeathTable {
 public:
  DeathTable(const MortalityCurves& curves, int first_cohort, int last_cohort)
      : first_(first_cohort), count_(last_cohort - first_cohort + 1) {
    q_.resize(static_cast<std::size_t>(kSexCount * count_ * kAgeCount));
    for (int s = 0; s < kSexCount; ++s)
      for (int c = 0; c < count_; ++c) {
        const auto& curve = curves.curve(static_cast<Sex>(s), first_ + c);
        for (int a = 0; a < kAgeCount; ++a)
          q_[slot(s, c, a)] = death_probability(curve, a, kStepYears);
      }
  }
  double operator()(Sex sex, int cohort, int age) const {
    const int c = std::clamp(cohort - first_, 0, count_ - 1);
    return q_[slot(static_cast<int>(sex), c, std::min(age, kMaxAge))];
  }

 private:
  std::size_t slot(int s, int c, int a) const {
    return static_cast<std::size_t>((s * count_ + c) * kAgeCount + a);
  }
  int first_;
  int count_;
  std::vector<double> q_;
};

// Annual conception hazard split into a cohort-age part and an
// ethnicity-year scale, so the inner loop does no table lookups.
class ConceptionTable {
 public:
  static constexpr int kAges = PregnancyHazardModel::kMaxAge - PregnancyHazardModel::kMinAge + 1;

  ConceptionTable(const PregnancyHazardModel& model, int ethnic_count, int first_cohort,
                  int last_cohort, int first_year, int last_year)
      : first_cohort_(first_cohort),
        cohorts_(last_cohort - first_cohort + 1),
        first_year_(first_year),
        years_(last_year - first_year + 1),
        ethnic_count_(ethnic_count) {
    base_.resize(static_cast<std::size_t>(cohorts_ * kAges));
    for (int c = 0; c < cohorts_; ++c)
      for (int a = 0; a < kAges; ++a) {
        const int age = a + PregnancyHazardModel::kMinAge;
        base_[static_cast<std::size_t>(c * kAges + a)] = model.base_hazard.lookup_flat(
            Coords().age_group(AgeGroup::of_age(age)).birth_year(first_cohort_ + c));
      }
    scale_.resize(static_cast<std::size_t>(ethnic_count * years_));
    for (int e = 0; e < ethnic_count; ++e)
      for (int y = 0; y < years_; ++y)
        scale_[static_cast<std::size_t>(e * years_ + y)] =
            model.scale(EthnicGroup{static_cast<std::uint8_t>(e)}, first_year_ + y);
  }

  double probability(int cohort, int age, EthnicGroup eth, int year) const {
    if (age < PregnancyHazardModel::kMinAge || age > PregnancyHazardModel::kMaxAge) return 0.0;
    const int c = std::clamp(cohort - first_cohort_, 0, cohorts_ - 1);
    const int y = std::clamp(year - first_year_, 0, years_ - 1);
    const double h = base_[static_cast<std::size_t>(c * kAges + age - PregnancyHazardModel::kMinAge)] *
                     scale_[static_cast<std::size_t>(eth.code * years_ + y)];
    return -std::expm1(-h * kStepYears);
  }

 private:
  int first_cohort_, cohorts_, first_year_, years_, ethnic_count_;
  std::vector<double> base_;
  std::vector<double> scale_;
};

class Kernel {
 public:
  Kernel(const RunConfig& config, const Models& models, Population& pop, StepObserver* observer)
      : cfg_(config),
        m_(models),
        pop_(pop),
        observer_(observer),
        E_(models.codebook.size()),
        cells_(E_),
        deaths_(models.mortality, config.start.year() - 130, config.end.year() + 1),
        conceptions_(models.fertility, E_, config.start.year() - 60, config.end.year() + 1,
                     config.start.year() - 1, config.end.year() + 1) {
    result_.config = config;
    result_.scale_factor = pop.scale_factor();
    result_.models_fingerprint = models_fingerprint(models);
    result_.ledger = EventLedger(E_);
    due_.resize(static_cast<std::size_t>(config.steps() + PregnancyHazardModel::kGestationQuarters + 1));
  }

  RunResult run() {
    if (cfg_.start.is_mid_year()) result_.snapshots.push_back(Snapshot::of(pop_, cfg_.start, E_));
    for (int t = 0; t < cfg_.steps(); ++t) {
      const SimDate d = cfg_.start + t;
      if (observer_) observer_->before_step(static_cast<std::size_t>(t), d, pop_);
      result_.ledger.begin_step(d);
      try {
        step(t, d);
      } catch (const DomainError& e) {
        throw DomainError("step " + std::to_string(t) + " (" + d.to_string() + "): " + e.what());
      }
      if (observer_) observer_->after_step(static_cast<std::size_t>(t), d, pop_, result_.ledger);
      pop_.compact();
      if ((d + 1).is_mid_year()) result_.snapshots.push_back(Snapshot::of(pop_, d + 1, E_));
    }
    return std::move(result_);
  }

 private:
  int cell(const Person& p, SimDate d) const {
    return cells_.index(p.sex, AgeGroup::of_age(age_of(p, d)).index(), p.ethnicity);
  }
  CellEvents& events(const Person& p, SimDate d) {
    return p.residence == Residence::Pool ? result_.ledger.pool(cell(p, d))
                                          : result_.ledger.living(cell(p, d));
  }

  void step(int t, SimDate d) {
    const bool waves = cfg_.migration && cfg_.scenario && cfg_.scenario->brexit;
    if (waves && d == cfg_.scenario->wave_start())
      result_.wave_totals = freeze_wave_totals(pop_, *cfg_.scenario, m_.codebook);
    deliver(t, d);
    deaths_and_conceptions(t, d);
    if (cfg_.migration) baseline_migration(t, d);
    if (waves && cfg_.scenario->in_wave(d)) wave(t, d);
  }

  void deliver(int t, SimDate d) {
    auto& due = due_[static_cast<std::size_t>(t)];
    for (PersonId id : due) {
      Person& mother = pop_[id];
      if (mother.residence == Residence::Dead || mother.delivery_due != d) continue;
      RandomStream rng(cfg_.seed, id, t, Purpose::Twin);
      for (Person& child : draw_birth_outcome(m_.fertility_data, mother, d, rng)) {
        const PersonId cid = pop_.add(child);
        ++events(pop_[cid], d).births;
      }
    }
    due.clear();
    due.shrink_to_fit();
  }

  void deaths_and_conceptions(int t, SimDate d) {
    const auto active = pop_.active();
    const int year = d.year();
    for (std::size_t i = 0; i < active.size(); ++i) {
      const PersonId id = active[i];
      Person& p = pop_[id];
      if (p.residence == Residence::Dead) continue;
      const int age = age_of(p, d);
      const int cohort = p.birth_year();
      if (keyed_uniform(cfg_.seed, id, t, Purpose::Death) < deaths_(p.sex, cohort, age)) {
        ++events(p, d).deaths;
        pop_.mark_dead(id);
        continue;
      }
      if (p.sex != Sex::Female || p.pregnant_at(d)) continue;
      if (p.last_childbirth && d - *p.last_childbirth < PregnancyHazardModel::kPostpartumQuarters)
        continue;
      const double q = conceptions_.probability(cohort, age, p.ethnicity, year);
      if (q > 0.0 && keyed_uniform(cfg_.seed, id, t, Purpose::Conception) < q) {
        p.delivery_due = d + PregnancyHazardModel::kGestationQuarters;
        due_[static_cast<std::size_t>(t + PregnancyHazardModel::kGestationQuarters)].push_back(id);
      }
    }
  }

  int group_index(Sex sex, EthnicGroup eth, int band) const {
    return (static_cast<int>(sex) * E_ + eth.code) * kBaseBands + band;
  }

  std::optional<int> group_of(const Person& p, SimDate d) const {
    const auto b = migration_base_band(age_of(p, d), d);
    if (!b) return std::nullopt;
    return group_index(p.sex, p.ethnicity, *b);
  }

  CohortFlow* flow(int g, SimDate d) {
    if (d >= SimDate(kLastCensusYear, 0)) return nullptr;
    const int decade = d < SimDate(kDecadeStarts[1], 0) ? kDecadeStarts[0] : kDecadeStarts[1];
    const int band = g % kBaseBands;
    const int eth = (g / kBaseBands) % E_;
    const int sex = g / kBaseBands / E_;
    return &result_.cohort_flows[CohortKey{static_cast<Sex>(sex),
                                           EthnicGroup{static_cast<std::uint8_t>(eth)}, band, decade}];
  }

  void baseline_migration(int t, SimDate d) {
    if (d < SimDate(kFirstCensusYear, 0)) return;
    const int n_groups = kSexCount * E_ * kBaseBands;
    std::vector<std::vector<PersonId>> members(static_cast<std::size_t>(n_groups));
    pop_.for_each_living([&](const Person& p) {
      if (auto g = group_of(p, d)) members[static_cast<std::size_t>(*g)].push_back(p.id);
    });
    const FamilyIndex families(pop_, d);
    std::vector<std::int64_t> credit_in(static_cast<std::size_t>(n_groups), 0);
    std::vector<std::int64_t> credit_out(static_cast<std::size_t>(n_groups), 0);

    for (int band = kBaseBands - 1; band >= 0; --band)
      for (int s = 0; s < kSexCount; ++s)
        for (int e = 0; e < E_; ++e) {
          const Sex sex = static_cast<Sex>(s);
          const EthnicGroup eth{static_cast<std::uint8_t>(e)};
          const int g = group_index(sex, eth, band);
          const auto gi = static_cast<std::size_t>(g);
          const CohortMigrationRate r =
              cfg_.scenario ? effective_rate(m_.migration, *cfg_.scenario, m_.codebook, sex, eth, band, d)
                            : m_.migration.baseline(sex, eth, band, d);
          if (r.k == 0.0) continue;
          const double n = static_cast<double>(members[gi].size());
          const double k = r.law == MigrationLaw::Absolute ? r.k / pop_.scale_factor() : r.k;
          const double dm = apply_rate(k, r.law, n, kStepYears);
          const std::uint64_t entity = kGroupEntity + static_cast<std::uint64_t>(g);
          const double u = keyed_uniform(cfg_.seed, entity, t, Purpose::MigrationFlow);
          if (dm > 0.0) {
            const std::int64_t own = std::max<std::int64_t>(0, poisson_quantile(dm, u) - credit_in[gi]);
            if (own == 0) continue;
            RandomStream rng(cfg_.seed, entity, t, Purpose::ImmigrantTemplate);
            const AgeRange ages = d < SimDate(kLastCensusYear, 0)
                                      ? cohort_age_range(band, d < SimDate(kDecadeStarts[1], 0)
                                                                   ? kDecadeStarts[0]
                                                                   : kDecadeStarts[1],
                                                         d)
                                      : post_census_age_range(band);
            const Moves mv = immigrate(pop_, MigrantCell{sex, eth, ages}, members[gi], own, d, families, rng);
            for (PersonId id : mv.principals) ++result_.ledger.living(cell(pop_[id], d)).immigrants;
            if (auto* f = flow(g, d)) f->immigrants += static_cast<std::int64_t>(mv.principals.size());
            for (PersonId id : mv.children) {
              const Person& c = pop_[id];
              ++result_.ledger.living(cell(c, d)).immigrants;
              if (auto cg = group_of(c, d)) {
                ++credit_in[static_cast<std::size_t>(*cg)];
                if (auto* f = flow(*cg, d)) ++f->immigrants;
              }
            }
          } else if (dm < 0.0) {
            const std::int64_t requested =
                std::min(static_cast<std::int64_t>(n), poisson_quantile(-dm, u));
            std::int64_t own = std::max<std::int64_t>(0, requested - credit_out[gi]);
            if (own == 0) continue;
            std::vector<PersonId> present;
            present.reserve(members[gi].size());
            for (PersonId id : members[gi])
              if (pop_[id].residence == Residence::Living) present.push_back(id);
            own = std::min<std::int64_t>(own, static_cast<std::int64_t>(present.size()));
            RandomStream rng(cfg_.seed, entity, t, Purpose::MigrantSelection);
            const auto chosen =
                select_migrants(pop_, present, static_cast<std::size_t>(own), SelectionMode::Random, rng);
            const Moves mv = emigrate(pop_, chosen, families);
            record_emigration(mv.principals, d);
            record_emigration(mv.children, d);
            if (auto* f = flow(g, d)) f->emigrants += static_cast<std::int64_t>(mv.principals.size());
            for (PersonId id : mv.children)
              if (auto cg = group_of(pop_[id], d)) {
                ++credit_out[static_cast<std::size_t>(*cg)];
                if (auto* f = flow(*cg, d)) ++f->emigrants;
              }
          }
        }
  }

  void record_emigration(const std::vector<PersonId>& ids, SimDate d) {
    for (PersonId id : ids) {
      const int c = cell(pop_[id], d);
      ++result_.ledger.living(c).emigrants;
      ++result_.ledger.pool(c).immigrants;
    }
  }

  void wave(int t, SimDate d) {
    const ScenarioConfig& sc = *cfg_.scenario;
    const auto eligible = exodus_eligible(pop_, sc, m_.codebook);
    const auto leavers = exodus_plan(pop_, sc, m_.codebook, result_.wave_totals, d);
    const FamilyIndex families(pop_, d);
    ExodusRecord rec;
    rec.date = d;
    rec.eligible = static_cast<std::int64_t>(eligible.size());
    rec.selected = leavers;
    for (PersonId id : leavers) rec.selected_arrivals.push_back(*pop_[id].immigrated);
    const Moves out = emigrate(pop_, leavers, families);
    record_emigration(out.principals, d);
    record_emigration(out.children, d);
    rec.children = static_cast<std::int64_t>(out.children.size());
    for (PersonId id : eligible) {
      const Person& p = pop_[id];
      if (p.residence != Residence::Living) continue;
      if (!rec.latest_remaining_arrival || *p.immigrated > *rec.latest_remaining_arrival)
        rec.latest_remaining_arrival = p.immigrated;
    }
    result_.exodus.push_back(std::move(rec));

    RandomStream rng(cfg_.seed, kWaveEntity, t, Purpose::ReturnSelection);
    const ReturnPlan plan = return_plan(pop_, sc, m_.codebook, result_.wave_totals, d, rng);
    if (plan.shortfall > 0) {
      result_.return_shortfall += plan.shortfall;
      result_.warnings.push_back(d.to_string() + ": emigrant pool short of " +
                                 std::to_string(plan.shortfall) + " returnees");
    }
    const Moves back = return_from_pool(pop_, plan.persons, families, d);
    for (const auto* ids : {&back.principals, &back.children})
      for (PersonId id : *ids) {
        const int c = cell(pop_[id], d);
        ++result_.ledger.living(c).immigrants;
        ++result_.ledger.pool(c).emigrants;
      }
  }

  const RunConfig& cfg_;
  const Models& m_;
  Population& pop_;
  StepObserver* observer_;
  int E_;
  CellIndexer cells_;
  DeathTable deaths_;
  ConceptionTable conceptions_;
  std::vector<std::vector<PersonId>> due_;
  RunResult result_;
};

}  // namespace

RunResult run(const RunConfig& config, const Models& models, StepObserver* observer) {
  Population pop = build_initial_population(models.census, models.codebook, kFirstCensusYear,
                                            config.start, config.population_size, config.seed);
  return run(config, models, std::move(pop), observer);
}

RunResult run(const RunConfig& config, const Models& models, Population population,
              StepObserver* observer) {
  if (config.end < config.start) throw DomainError("run ends before it starts");
  if (config.scenario) config.scenario->validate(config.end);
  if (models.codebook.size() == 0) throw DomainError("models carry no ethnic groups");
  Kernel k(config, models, population, observer);
  return k.run();
}

}  // namespace demosim
