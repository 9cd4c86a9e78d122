#include "demosim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "demosim/csv.hpp"

namespace demosim {

void ScenarioConfig::validate(SimDate run_end) const {
  for (double f : {f_enl, f_ex, f_em, f_ret, eu_emigration_share})
    if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("scenario '" + name + "': factors must be non-negative");
  if (brexit)
    for (double f : {f_ex, f_em, f_ret})
      if (f > 1.0) throw DomainError("scenario '" + name + "': Brexit fractions must lie in [0, 1]");
  if (eu_emigration_share > 1.0) throw DomainError("scenario '" + name + "': EU emigration share above 1");
  if (wave_years <= 0 || wave_delay_years < 0 || enlargement_years < 0)
    throw DomainError("scenario '" + name + "': wave and enlargement periods must be positive");
  if (brexit && run_end > wave_start() && wave_end() > run_end)
    throw DomainError("scenario '" + name + "': migration wave ends after the simulation");
}

ScenarioConfig builtin_scenario(BuiltinScenario which) {
  ScenarioConfig s;
  switch (which) {
    case BuiltinScenario::StatusQuo:
      s.name = "status-quo";
      break;
    case BuiltinScenario::SecondEnlargement:
      s.name = "2nd-enlargement";
      s.f_enl = 2.0;
      break;
    case BuiltinScenario::Amicable:
      s.name = "amicable";
      s.brexit = true;
      s.f_ex = 0.7;
      s.f_em = 0.8;
      s.f_ret = 0.1;
      break;
    case BuiltinScenario::Depopulation:
      s.name = "depopulation";
      s.brexit = true;
      s.f_ex = 0.1;
      s.f_em = 0.8;
      s.f_ret = 0.1;
      break;
    case BuiltinScenario::Radical:
      s.name = "radical";
      s.brexit = true;
      s.f_ex = 0.7;
      s.f_em = 0.3;
      s.f_ret = 0.8;
      break;
  }
  return s;
}

std::vector<ScenarioConfig> builtin_scenarios() {
  return {builtin_scenario(BuiltinScenario::StatusQuo), builtin_scenario(BuiltinScenario::SecondEnlargement),
          builtin_scenario(BuiltinScenario::Amicable), builtin_scenario(BuiltinScenario::Depopulation),
          builtin_scenario(BuiltinScenario::Radical)};
}

std::optional<ScenarioConfig> find_builtin_scenario(std::string_view slug) {
  for (auto& s : builtin_scenarios())
    if (s.name == slug) return s;
  return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_factor(const std::string& key, const std::string& v) {
  double d;
  if (!csv::parse_double(v, d)) throw DomainError("scenario key '" + key + "': bad number '" + v + "'");
  return d;
}

int parse_whole(const std::string& key, const std::string& v) {
  std::int64_t i;
  if (!csv::parse_int(v, i)) throw DomainError("scenario key '" + key + "': bad integer '" + v + "'");
  return static_cast<int>(i);
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig s;
  s.name = "custom";
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DomainError("scenario line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "name") {
      s.name = value;
    } else if (key == "brexit") {
      if (value == "true") s.brexit = true;
      else if (value == "false") s.brexit = false;
      else throw DomainError("scenario key 'brexit': expected true or false");
    } else if (key == "f_enl") {
      s.f_enl = value == "-" ? 1.0 : parse_factor(key, value);
    } else if (key == "f_ex") {
      s.f_ex = parse_factor(key, value);
    } else if (key == "f_em") {
      s.f_em = parse_factor(key, value);
    } else if (key == "f_ret") {
      s.f_ret = parse_factor(key, value);
    } else if (key == "eu_emigration_share") {
      s.eu_emigration_share = parse_factor(key, value);
    } else if (key == "referendum") {
      s.referendum = SimDate::parse(value);
    } else if (key == "brexit_date") {
      s.brexit_date = SimDate::parse(value);
    } else if (key == "enlargement_start") {
      s.enlargement_start = parse_whole(key, value);
    } else if (key == "enlargement_years") {
      s.enlargement_years = parse_whole(key, value);
    } else if (key == "wave_delay_years") {
      s.wave_delay_years = parse_whole(key, value);
    } else if (key == "wave_years") {
      s.wave_years = parse_whole(key, value);
    } else {
      throw DomainError("scenario line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return s;
}

std::string format_scenario(const ScenarioConfig& s) {
  std::ostringstream out;
  out << "name=" << s.name << '\n'
      << "brexit=" << (s.brexit ? "true" : "false") << '\n'
      << "f_enl=" << csv::format_double(s.f_enl) << '\n'
      << "f_ex=" << csv::format_double(s.f_ex) << '\n'
      << "f_em=" << csv::format_double(s.f_em) << '\n'
      << "f_ret=" << csv::format_double(s.f_ret) << '\n'
      << "referendum=" << s.referendum.to_string() << '\n'
      << "brexit_date=" << s.brexit_date.to_string() << '\n'
      << "enlargement_start=" << s.enlargement_start << '\n'
      << "enlargement_years=" << s.enlargement_years << '\n'
      << "wave_delay_years=" << s.wave_delay_years << '\n'
      << "wave_years=" << s.wave_years << '\n'
      << "eu_emigration_share=" << csv::format_double(s.eu_emigration_share) << '\n';
  return out.str();
}

ScenarioConfig resolve_scenario(const std::string& name_or_file) {
  if (auto b = find_builtin_scenario(name_or_file)) return *b;
  std::ifstream in(name_or_file);
  if (!in) throw DomainError("unknown scenario '" + name_or_file + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

CohortMigrationRate effective_rate(const MigrationSchedule& schedule, const ScenarioConfig& scenario,
                                   const EthnicCodebook& book, Sex sex, EthnicGroup eth,
                                   int base_band, SimDate date) {
  CohortMigrationRate r = schedule.baseline(sex, eth, base_band, date);
  const EthnicAggregate agg = book.aggregate(eth);
  if (scenario.brexit && agg == EthnicAggregate::EUImmigrant && date >= scenario.brexit_date)
    r = schedule.rate(CohortKey{sex, eth, base_band, kDecadeStarts[0]});
  if (!scenario.brexit && agg == EthnicAggregate::EUImmigrant && date >= scenario.enlargement_begin() &&
      date < scenario.enlargement_end())
    r.k *= scenario.f_enl;
  if (scenario.brexit && agg == EthnicAggregate::NativeBritish && r.k < 0.0 &&
      date >= scenario.brexit_date)
    r.k *= (1.0 - scenario.eu_emigration_share) + scenario.eu_emigration_share * scenario.f_em;
  return r;
}

std::vector<PersonId> exodus_eligible(const Population& pop, const ScenarioConfig& scenario,
                                      const EthnicCodebook& book) {
  std::vector<PersonId> out;
  pop.for_each_living([&](const Person& p) {
    if (book.aggregate(p.ethnicity) == EthnicAggregate::EUImmigrant && p.immigrated &&
        *p.immigrated <= scenario.brexit_date)
      out.push_back(p.id);
  });
  return out;
}

std::vector<PersonId> returnable(const Population& pop, const EthnicCodebook& book) {
  std::vector<PersonId> out;
  for (PersonId id : pop.active()) {
    const Person& p = pop[id];
    if (p.residence == Residence::Pool && book.aggregate(p.ethnicity) == EthnicAggregate::NativeBritish)
      out.push_back(id);
  }
  return out;
}

WaveTotals freeze_wave_totals(const Population& pop, const ScenarioConfig& scenario,
                              const EthnicCodebook& book) {
  WaveTotals t;
  if (!scenario.brexit) return t;
  t.exodus = std::llround(scenario.f_ex * static_cast<double>(exodus_eligible(pop, scenario, book).size()));
  t.returns = std::llround(scenario.f_ret * static_cast<double>(returnable(pop, book).size()));
  return t;
}

std::int64_t wave_share(std::int64_t total, int step, int steps) {
  if (steps <= 0 || step < 0 || step >= steps) throw DomainError("wave step out of range");
  return total / steps + (step < total % steps ? 1 : 0);
}

namespace {

int wave_step(const ScenarioConfig& scenario, SimDate date) {
  if (!scenario.brexit) throw DomainError("migration waves only occur under Brexit");
  if (!scenario.in_wave(date))
    throw DomainError("date " + date.to_string() + " is outside the migration wave");
  return date - scenario.wave_start();
}

}  // namespace

std::vector<PersonId> exodus_plan(const Population& pop, const ScenarioConfig& scenario,
                                  const EthnicCodebook& book, const WaveTotals& totals,
                                  SimDate date) {
  const int step = wave_step(scenario, date);
  const auto eligible = exodus_eligible(pop, scenario, book);
  const auto want = static_cast<std::size_t>(wave_share(totals.exodus, step, scenario.wave_steps()));
  RandomStream unused(0, 0, 0, Purpose::Test);
  return select_migrants(pop, eligible, std::min(want, eligible.size()), SelectionMode::LIFO, unused);
}

ReturnPlan return_plan(const Population& pop, const ScenarioConfig& scenario,
                       const EthnicCodebook& book, const WaveTotals& totals, SimDate date,
                       RandomStream& rng) {
  const int step = wave_step(scenario, date);
  const auto pool = returnable(pop, book);
  const std::int64_t want = wave_share(totals.returns, step, scenario.wave_steps());
  ReturnPlan plan;
  const auto n = static_cast<std::size_t>(std::min<std::int64_t>(want, static_cast<std::int64_t>(pool.size())));
  plan.shortfall = want - static_cast<std::int64_t>(n);
  plan.persons = select_migrants(pop, pool, n, SelectionMode::Random, rng);
  return plan;
}

}  // namespace demosim
