#include "demosim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "demosim/csv.hpp"

namespace demosim {

bool GroupFilter::matches(Sex s, int age, EthnicGroup eth, const EthnicCodebook& book) const {
  if (contradictory) return false;
  if (sex && *sex != s) return false;
  if (ages && !ages->contains(age)) return false;
  if (ethnicity && *ethnicity != eth) return false;
  if (aggregate && book.aggregate(eth) != *aggregate) return false;
  return true;
}

GroupFilter GroupFilter::operator&(const GroupFilter& o) const {
  GroupFilter f = *this;
  f.contradictory = contradictory || o.contradictory;
  if (o.sex) {
    if (f.sex && *f.sex != *o.sex) f.contradictory = true;
    f.sex = o.sex;
  }
  if (o.ethnicity) {
    if (f.ethnicity && *f.ethnicity != *o.ethnicity) f.contradictory = true;
    f.ethnicity = o.ethnicity;
  }
  if (o.aggregate) {
    if (f.aggregate && *f.aggregate != *o.aggregate) f.contradictory = true;
    f.aggregate = o.aggregate;
  }
  if (o.ages) {
    if (!f.ages) {
      f.ages = o.ages;
    } else {
      AgeRange r;
      r.lo = std::max(f.ages->lo, o.ages->lo);
      if (f.ages->hi && o.ages->hi) r.hi = std::min(*f.ages->hi, *o.ages->hi);
      else r.hi = f.ages->hi ? f.ages->hi : o.ages->hi;
      if (r.hi && *r.hi <= r.lo) f.contradictory = true;
      f.ages = r;
    }
  }
  return f;
}

std::string GroupFilter::describe(const EthnicCodebook& book) const {
  std::vector<std::string> terms;
  if (sex) terms.push_back("sex=" + std::string(sex_code(*sex)));
  if (ages)
    terms.push_back("age=" + std::to_string(ages->lo) + "-" + (ages->hi ? std::to_string(*ages->hi - 1) : ""));
  if (aggregate) terms.push_back("agg=" + std::string(aggregate_name(*aggregate)));
  if (ethnicity) terms.push_back("eth=" + book.name(*ethnicity));
  if (terms.empty()) return "all";
  std::string out = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) out += ";" + terms[i];
  return out;
}

GroupFilter GroupFilter::parse(std::string_view text, const EthnicCodebook& book) {
  GroupFilter f;
  if (text.empty() || text == "all") return f;
  for (const auto& term : csv::split(text, ';')) {
    const auto eq = term.find('=');
    if (eq == std::string::npos) throw DomainError("filter term '" + term + "' lacks '='");
    const std::string key = term.substr(0, eq);
    const std::string value = term.substr(eq + 1);
    GroupFilter t;
    if (key == "sex") {
      t.sex = parse_sex(value);
    } else if (key == "age") {
      // "lo-hi" inclusive, or "lo-" open-ended.
      const auto dash = value.find('-');
      std::int64_t lo = 0, hi = 0;
      if (dash == std::string::npos || !csv::parse_int(value.substr(0, dash), lo))
        throw DomainError("bad age range '" + value + "'");
      t.ages = AgeRange{static_cast<int>(lo), std::nullopt};
      if (dash + 1 < value.size()) {
        if (!csv::parse_int(value.substr(dash + 1), hi)) throw DomainError("bad age range '" + value + "'");
        t.ages->hi = static_cast<int>(hi) + 1;
      }
    } else if (key == "agg") {
      bool found = false;
      for (auto a : {EthnicAggregate::NativeBritish, EthnicAggregate::EUImmigrant, EthnicAggregate::Other})
        if (aggregate_name(a) == value) {
          t.aggregate = a;
          found = true;
        }
      if (!found) throw DomainError("unknown ethnic aggregate '" + value + "'");
    } else if (key == "eth") {
      t.ethnicity = book.at(value);
    } else {
      throw DomainError("unknown filter key '" + key + "'");
    }
    f = f & t;
  }
  return f;
}

namespace {

template <typename F>
void for_each_cell(const Snapshot& snap, F&& f) {
  for (int s = 0; s < kSexCount; ++s)
    for (int a = 0; a < kAgeCount; ++a)
      for (int e = 0; e < snap.ethnic_count; ++e) {
        const EthnicGroup g{static_cast<std::uint8_t>(e)};
        const auto n = snap.at(static_cast<Sex>(s), a, g);
        if (n != 0) f(static_cast<Sex>(s), a, g, n);
      }
}

}  // namespace

double median_age(const Snapshot& snap, const EthnicCodebook& book, const GroupFilter& filter) {
  std::array<std::int64_t, kAgeCount> by_age{};
  for_each_cell(snap, [&](Sex s, int a, EthnicGroup e, std::int64_t n) {
    if (filter.matches(s, a, e, book)) by_age[static_cast<std::size_t>(a)] += n;
  });
  std::int64_t total = 0;
  for (auto n : by_age) total += n;
  if (total == 0) throw DomainError("median age of an empty group");
  // 1-based positions of the central value(s).
  auto value_at = [&](std::int64_t pos) {
    std::int64_t seen = 0;
    for (int a = 0; a < kAgeCount; ++a) {
      seen += by_age[static_cast<std::size_t>(a)];
      if (seen >= pos) return a;
    }
    return kMaxAge;
  };
  if (total % 2 == 1) return value_at((total + 1) / 2);
  return 0.5 * (value_at(total / 2) + value_at(total / 2 + 1));
}

std::int64_t head_count(const Snapshot& snap, const EthnicCodebook& book, const GroupFilter& filter) {
  std::int64_t n = 0;
  for_each_cell(snap, [&](Sex s, int a, EthnicGroup e, std::int64_t c) {
    if (filter.matches(s, a, e, book)) n += c;
  });
  return n;
}

Pyramid pyramid(const Snapshot& snap) {
  Pyramid p{};
  for_each_cell(snap, [&](Sex s, int a, EthnicGroup, std::int64_t n) {
    p[static_cast<std::size_t>(s)][static_cast<std::size_t>(AgeGroup::of_age(a).index())] += n;
  });
  return p;
}

double reproductive_share(const Snapshot& snap) {
  const Pyramid p = pyramid(snap);
  double total = 0;
  for (const auto& row : p)
    for (auto n : row) total += static_cast<double>(n);
  if (total == 0) throw DomainError("reproductive share of an empty population");
  const auto& f = p[static_cast<std::size_t>(Sex::Female)];
  double women = 0;
  for (int b = 3; b <= 9; ++b) women += static_cast<double>(f[static_cast<std::size_t>(b)]);
  women += static_cast<double>(f[10]) / 5.0;
  return women / total;
}

double sex_ratio(const Snapshot& snap, const EthnicCodebook& book, const GroupFilter& filter) {
  double m = 0, f = 0;
  for_each_cell(snap, [&](Sex s, int a, EthnicGroup e, std::int64_t n) {
    if (!filter.matches(s, a, e, book)) return;
    (s == Sex::Male ? m : f) += static_cast<double>(n);
  });
  if (f == 0) throw DomainError("sex ratio with no females");
  return m / f;
}

DependencyRatios dependency_ratios(const Snapshot& snap) {
  const Pyramid p = pyramid(snap);
  std::array<double, AgeGroup::kCount> bands{};
  for (const auto& row : p)
    for (int b = 0; b < AgeGroup::kCount; ++b) bands[static_cast<std::size_t>(b)] += static_cast<double>(row[static_cast<std::size_t>(b)]);
  double children = 0, working = 0, elderly = 0;
  for (int b = 0; b < AgeGroup::kCount; ++b) {
    const double n = bands[static_cast<std::size_t>(b)];
    if (b < 3) children += n;
    else if (b < 13) working += n;
    else if (b == 13) {
      working += n / 5.0;
      elderly += n * 4.0 / 5.0;
    } else elderly += n;
  }
  if (working == 0) throw DomainError("dependency ratio with no working-age population");
  return {(children + elderly) / working, elderly / working};
}

GrowthDecomposition growth_decomposition(const EventLedger& ledger, SimDate from, SimDate to,
                                         EthnicAggregate aggregate, const EthnicCodebook& book) {
  if (to < from) throw DomainError("decomposition window ends before it starts");
  if (ledger.steps() == 0) {
    if (from != to) throw DomainError("decomposition window outside an empty ledger");
    return {};
  }
  const SimDate first = ledger.date(0);
  const SimDate last = ledger.date(ledger.steps() - 1) + 1;
  if (from < first || to > last)
    throw DomainError("decomposition window " + from.to_string() + ".." + to.to_string() +
                      " outside the ledger's " + first.to_string() + ".." + last.to_string());
  GrowthDecomposition g;
  const CellIndexer& idx = ledger.indexer();
  for (std::size_t t = 0; t < ledger.steps(); ++t) {
    const SimDate d = ledger.date(t);
    if (d < from || d >= to) continue;
    const auto& ev = ledger.living_events(t);
    for (int c = 0; c < idx.size(); ++c) {
      if (book.aggregate(idx.key(c).ethnicity) != aggregate) continue;
      const CellEvents& e = ev[static_cast<std::size_t>(c)];
      g.natural_growth += e.births - e.deaths;
      g.net_migration += e.immigrants - e.emigrants;
    }
  }
  return g;
}

std::vector<ShareEstimate> sampling_error(const std::vector<std::int64_t>& counts) {
  if (counts.size() < 2) throw DomainError("sampling error needs at least two groups");
  double a0 = 0;
  for (auto n : counts) {
    if (n < 0) throw DomainError("negative group count");
    a0 += static_cast<double>(n) + 1.0;
  }
  std::vector<ShareEstimate> out;
  out.reserve(counts.size());
  for (auto n : counts) {
    const double a = static_cast<double>(n) + 1.0;
    out.push_back({a / a0, std::sqrt(a * (a0 - a) / (a0 * a0 * (a0 + 1.0)))});
  }
  return out;
}

std::string_view param_name(ScenarioParam p) {
  switch (p) {
    case ScenarioParam::Enl: return "f_enl";
    case ScenarioParam::Ex: return "f_ex";
    case ScenarioParam::Em: return "f_em";
    case ScenarioParam::Ret: return "f_ret";
  }
  return "";
}

ScenarioParam parse_param(std::string_view name) {
  for (auto p : {ScenarioParam::Enl, ScenarioParam::Ex, ScenarioParam::Em, ScenarioParam::Ret})
    if (param_name(p) == name) return p;
  throw DomainError("unknown scenario parameter '" + std::string(name) + "'");
}

double& param_ref(ScenarioConfig& s, ScenarioParam p) {
  switch (p) {
    case ScenarioParam::Enl: return s.f_enl;
    case ScenarioParam::Ex: return s.f_ex;
    case ScenarioParam::Em: return s.f_em;
    case ScenarioParam::Ret: return s.f_ret;
  }
  return s.f_enl;
}

namespace {

std::vector<std::vector<double>> run_all(const ScenarioRunner& runner, const std::vector<ScenarioConfig>& configs,
                                         const OutputSelector& output, int jobs) {
  std::vector<std::vector<double>> out(configs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) out[i] = output(runner(configs[i]));
    return out;
  }
  for (std::size_t start = 0; start < configs.size(); start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<std::vector<double>>> batch;
    for (std::size_t i = start; i < std::min(configs.size(), start + static_cast<std::size_t>(jobs)); ++i)
      batch.push_back(std::async(std::launch::async, [&, i] { return output(runner(configs[i])); }));
    for (std::size_t i = 0; i < batch.size(); ++i) out[start + i] = batch[i].get();
  }
  return out;
}

void check_applicable(const ScenarioConfig& s, ScenarioParam p) {
  if (p == ScenarioParam::Enl && s.brexit)
    throw DomainError("f_enl only applies to scenarios without Brexit");
  if (p != ScenarioParam::Enl && !s.brexit)
    throw DomainError(std::string(param_name(p)) + " only applies to Brexit scenarios");
}

void check_same_length(const std::vector<std::vector<double>>& series) {
  for (const auto& s : series)
    if (s.size() != series[0].size()) throw DomainError("perturbed runs produced series of different lengths");
}

}  // namespace

SensitivityReport sensitivity(const ScenarioRunner& runner, const ScenarioConfig& scenario,
                              ScenarioParam param, const OutputSelector& output, int jobs) {
  check_applicable(scenario, param);
  SensitivityReport rep;
  rep.parameter = std::string(param_name(param));
  ScenarioConfig base = scenario;
  const double p = param_ref(base, param);
  rep.base_value = p;
  rep.delta = 0.05 * p;
  if (p == 0.0) {
    rep.delta = 0.05;
    rep.warnings.push_back(rep.parameter + " is zero; using an absolute step of 0.05");
  }
  ScenarioConfig up = scenario, down = scenario;
  param_ref(up, param) = p + rep.delta;
  param_ref(down, param) = p - rep.delta;
  rep.forward = p - rep.delta < 0.0;
  if (rep.forward) {
    down = scenario;
    rep.warnings.push_back(rep.parameter + " cannot be lowered; using a forward difference");
  }
  const auto series = run_all(runner, {base, up, down}, output, jobs);
  check_same_length(series);
  rep.base = series[0];
  rep.up = series[1];
  rep.down = series[2];
  const double span = rep.forward ? rep.delta : 2.0 * rep.delta;
  for (std::size_t i = 0; i < rep.base.size(); ++i) rep.derivative.push_back((rep.up[i] - rep.down[i]) / span);
  return rep;
}

JointSensitivity joint_sensitivity(const ScenarioRunner& runner, const ScenarioConfig& scenario,
                                   const OutputSelector& output, int jobs) {
  check_applicable(scenario, ScenarioParam::Em);
  ScenarioConfig em = scenario, ret = scenario, both = scenario;
  auto bump = [](double v) { return v == 0.0 ? 0.05 : v * 1.05; };
  em.f_em = bump(scenario.f_em);
  ret.f_ret = bump(scenario.f_ret);
  both.f_em = em.f_em;
  both.f_ret = ret.f_ret;
  const auto series = run_all(runner, {scenario, em, ret, both}, output, jobs);
  check_same_length(series);
  JointSensitivity js;
  js.base = series[0];
  for (std::size_t i = 0; i < js.base.size(); ++i) {
    js.effect_em.push_back(series[1][i] - js.base[i]);
    js.effect_ret.push_back(series[2][i] - js.base[i]);
    js.effect_joint.push_back(series[3][i] - js.base[i]);
    js.residual.push_back(std::abs(js.effect_joint[i] - js.effect_em[i] - js.effect_ret[i]));
  }
  return js;
}

std::vector<double> total_population_series(const RunResult& r) {
  std::vector<double> out;
  for (const auto& s : r.snapshots) out.push_back(static_cast<double>(s.living_total()) * r.scale_factor);
  return out;
}

std::vector<double> inflow_series(const EventLedger& ledger, EthnicGroup eth, double scale) {
  std::vector<double> out;
  const CellIndexer& idx = ledger.indexer();
  for (std::size_t t = 0; t < ledger.steps(); ++t) {
    double n = 0;
    for (int c = 0; c < idx.size(); ++c)
      if (idx.key(c).ethnicity == eth) n += static_cast<double>(ledger.living_events(t)[static_cast<std::size_t>(c)].immigrants);
    out.push_back(n * scale);
  }
  return out;
}

}  // namespace demosim
