// demosim: calibrate, run and analyse the population microsimulation.
//
// Exit codes: 0 success, 1 usage, 2 data or validation, 3 internal.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "demosim/analysis.hpp"
#include "demosim/calibration.hpp"
#include "demosim/csv.hpp"
#include "demosim/io.hpp"
#include "demosim/kernel.hpp"
#include "demosim/synthetic.hpp"

namespace fs = std::filesystem;
using namespace demosim;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Input errors detected before any work starts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 0.7 * 100 is not exactly 70, so trim to ten significant digits.
std::string percent(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g%%", f * 100.0);
  return buf;
}

void echo_scenario(const ScenarioConfig& s) {
  std::cout << "scenario " << s.name << ": brexit=" << (s.brexit ? "yes" : "no")
            << " f_enl=" << (s.brexit ? std::string("-") : percent(s.f_enl)) << " f_ex=" << percent(s.f_ex)
            << " f_em=" << percent(s.f_em) << " f_ret=" << percent(s.f_ret) << '\n';
}

struct CalibrateOpts {
  std::string data, out;
  std::int64_t population = 100000;
  std::uint64_t seed = 1;
};

int cmd_calibrate(const CalibrateOpts& o) {
  const Dataset data = load_dataset(o.data);
  Models models = calibrate_vital_models(data);
  const MigrationCalibration mig = calibrate_migration(models, o.population, o.seed);
  models.migration = mig.schedule;
  save_models(models, data, mig, CalibrationInfo{o.population, o.seed}, o.out);
  double abs_net = 0;
  int relative = 0, fallbacks = 0;
  for (const auto& c : mig.cohorts) {
    abs_net += std::abs(c.net_migration);
    relative += c.law == MigrationLaw::Relative ? 1 : 0;
    fallbacks += c.relative_fallback ? 1 : 0;
  }
  std::cout << "calibrated " << mig.cohorts.size() << " decade cohorts (" << relative << " relative, "
            << fallbacks << " relative fallbacks); rescale " << csv::format_double(mig.rescale)
            << "; total |net migration| " << std::llround(abs_net) << '\n'
            << "models written to " << o.out << '\n';
  return kOk;
}

struct RunOpts {
  std::string scenario = "status-quo", models, out;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> population;
  std::optional<int> steps;
  bool no_scenario = false;
};

RunConfig make_config(const RunOpts& o, const ScenarioConfig& scenario) {
  RunConfig cfg;
  cfg.seed = o.seed;
  if (o.population) cfg.population_size = *o.population;
  if (o.steps) cfg.end = cfg.start + *o.steps;
  if (!o.no_scenario) cfg.scenario = scenario;
  return cfg;
}

int cmd_run(const RunOpts& o) {
  ScenarioConfig scenario;
  try {
    scenario = resolve_scenario(o.scenario);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (o.steps && *o.steps < 0) throw UsageError("--steps must be non-negative");
  const RunConfig cfg = make_config(o, scenario);
  if (cfg.scenario) {
    try {
      cfg.scenario->validate(cfg.end);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  const Models models = load_models(o.models);
  echo_scenario(scenario);
  const RunResult r = run(cfg, models);
  write_run(r, models.codebook, o.out);
  std::cout << "ran " << cfg.steps() << " steps, " << r.snapshots.size() << " snapshots; final population "
            << (r.snapshots.empty() ? 0 : r.snapshots.back().living_total()) << " simulated (scale "
            << csv::format_double(r.scale_factor) << ") -> " << o.out << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return kOk;
}

struct AnalyzeOpts {
  std::vector<std::string> runs;
  std::string metric = "population", out, filter = "all";
  std::string sensitivity;
  bool joint = false;
  // Sensitivity re-runs.
  std::string models, scenario = "2nd-enlargement", ethnicity = std::string(kOtherWhite);
  std::uint64_t seed = 1;
  std::int64_t population = 100000;
  std::optional<int> steps;
  int jobs = 1;
};

const std::vector<std::string> kMetrics{"population", "share",          "median-age",         "reproductive-share",
                                        "sex-ratio",  "dependency-total", "dependency-old-age", "pyramid",
                                        "decomposition"};

int analyze_runs(const AnalyzeOpts& o) {
  std::vector<LoadedRun> runs;
  for (const auto& d : o.runs) runs.push_back(read_run(d));
  for (const auto& r : runs) {
    if (r.snapshots.size() != runs[0].snapshots.size() || r.ledger.dates() != runs[0].ledger.dates())
      throw DataError({"runs " + runs[0].dir.string() + " and " + r.dir.string() + " are on different step grids"});
    for (std::size_t i = 0; i < r.snapshots.size(); ++i)
      if (r.snapshots[i].date != runs[0].snapshots[i].date)
        throw DataError({"runs have different snapshot dates"});
  }
  if (!o.out.empty() && fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  std::ofstream file;
  if (!o.out.empty()) file.open(o.out);
  std::ostream& out = o.out.empty() ? std::cout : file;

  if (o.metric == "pyramid") {
    out << "date,scenario,sex,age_group,count\n";
    for (const auto& r : runs)
      for (const auto& s : r.snapshots) {
        const Pyramid p = pyramid(s);
        for (int sx = 0; sx < kSexCount; ++sx)
          for (int b = 0; b < AgeGroup::kCount; ++b)
            out << s.date.to_string() << ',' << r.scenario << ',' << sex_code(static_cast<Sex>(sx)) << ','
                << AgeGroup(b).label() << ','
                << csv::format_double(static_cast<double>(p[static_cast<std::size_t>(sx)][static_cast<std::size_t>(b)]) *
                                      r.scale_factor)
                << '\n';
      }
    return kOk;
  }
  if (o.metric == "decomposition") {
    out << "from,to,scenario,aggregate,natural_growth,net_migration\n";
    for (const auto& r : runs)
      for (std::size_t i = 0; i + 1 < r.snapshots.size(); ++i)
        for (auto a : {EthnicAggregate::NativeBritish, EthnicAggregate::EUImmigrant, EthnicAggregate::Other}) {
          const auto g = growth_decomposition(r.ledger, r.snapshots[i].date, r.snapshots[i + 1].date, a, r.codebook);
          out << r.snapshots[i].date.to_string() << ',' << r.snapshots[i + 1].date.to_string() << ',' << r.scenario
              << ',' << aggregate_name(a) << ','
              << csv::format_double(static_cast<double>(g.natural_growth) * r.scale_factor) << ','
              << csv::format_double(static_cast<double>(g.net_migration) * r.scale_factor) << '\n';
        }
    return kOk;
  }

  out << "date,scenario,metric,filter,value,sampling_std\n";
  for (const auto& r : runs) {
    GroupFilter filter;
    try {
      filter = GroupFilter::parse(o.filter, r.codebook);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    const std::string fdesc = filter.describe(r.codebook);
    for (const auto& s : r.snapshots) {
      std::optional<double> value, sd;
      const double total = static_cast<double>(s.living_total());
      const auto n = head_count(s, r.codebook, filter);
      if (o.metric == "population" || o.metric == "share") {
        if (total > 0) {
          const auto est = sampling_error({n, static_cast<std::int64_t>(total) - n});
          if (o.metric == "population") {
            value = static_cast<double>(n) * r.scale_factor;
            sd = est[0].std * total * r.scale_factor;
          } else {
            value = static_cast<double>(n) / total;
            sd = est[0].std;
          }
        } else if (o.metric == "population") {
          value = 0;
        }
      } else if (o.metric == "median-age") {
        if (n > 0) value = median_age(s, r.codebook, filter);
      } else if (o.metric == "reproductive-share") {
        if (total > 0) value = reproductive_share(s);
      } else if (o.metric == "sex-ratio") {
        GroupFilter females = filter & GroupFilter{Sex::Female, {}, {}, {}, false};
        if (head_count(s, r.codebook, females) > 0) value = sex_ratio(s, r.codebook, filter);
      } else {
        const auto p = pyramid(s);
        double working = 0;
        for (const auto& row : p)
          for (int b = 3; b < 13; ++b) working += static_cast<double>(row[static_cast<std::size_t>(b)]);
        if (working > 0) {
          const auto d = dependency_ratios(s);
          value = o.metric == "dependency-total" ? d.total : d.old_age;
        }
      }
      out << s.date.to_string() << ',' << r.scenario << ',' << o.metric << ',' << fdesc << ','
          << (value ? csv::format_double(*value) : "") << ',' << (sd ? csv::format_double(*sd) : "") << '\n';
    }
  }
  return kOk;
}

int analyze_sensitivity(const AnalyzeOpts& o) {
  ScenarioParam param;
  ScenarioConfig scenario;
  try {
    param = parse_param(o.sensitivity);
    scenario = resolve_scenario(o.scenario);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (o.models.empty()) throw UsageError("--sensitivity needs --models");
  const Models models = load_models(o.models);
  const EthnicGroup eth = [&] {
    try {
      return models.codebook.at(o.ethnicity);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }();
  RunConfig base;
  base.seed = o.seed;
  base.population_size = o.population;
  if (o.steps) base.end = base.start + *o.steps;
  const ScenarioRunner runner = [&](const ScenarioConfig& s) {
    RunConfig cfg = base;
    cfg.scenario = s;
    return run(cfg, models);
  };
  // f_enl acts on inflows; the Brexit factors are read off population size.
  const bool inflow = param == ScenarioParam::Enl;
  const OutputSelector output = [&](const RunResult& r) {
    return inflow ? inflow_series(r.ledger, eth, r.scale_factor) : total_population_series(r);
  };
  std::vector<SimDate> dates;
  if (inflow) {
    for (int t = 0; t < base.steps(); ++t) dates.push_back(base.start + t);
  } else {
    for (int t = 0; t <= base.steps(); ++t)
      if ((base.start + t).is_mid_year()) dates.push_back(base.start + t);
  }
  if (!o.out.empty() && fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  std::ofstream file;
  if (!o.out.empty()) file.open(o.out);
  std::ostream& out = o.out.empty() ? std::cout : file;
  try {
    if (o.joint) {
      const JointSensitivity js = joint_sensitivity(runner, scenario, output, o.jobs);
      out << "date,output,base,effect_em,effect_ret,effect_joint,residual\n";
      for (std::size_t i = 0; i < js.base.size(); ++i)
        out << dates[i].to_string() << ',' << (inflow ? "inflow" : "population") << ','
            << csv::format_double(js.base[i]) << ',' << csv::format_double(js.effect_em[i]) << ','
            << csv::format_double(js.effect_ret[i]) << ',' << csv::format_double(js.effect_joint[i]) << ','
            << csv::format_double(js.residual[i]) << '\n';
      return kOk;
    }
    const SensitivityReport rep = sensitivity(runner, scenario, param, output, o.jobs);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    out << "date,parameter,output,base_value,delta,base,up,down,derivative\n";
    for (std::size_t i = 0; i < rep.base.size(); ++i)
      out << dates[i].to_string() << ',' << rep.parameter << ',' << (inflow ? "inflow" : "population") << ','
          << csv::format_double(rep.base_value) << ',' << csv::format_double(rep.delta) << ','
          << csv::format_double(rep.base[i]) << ',' << csv::format_double(rep.up[i]) << ','
          << csv::format_double(rep.down[i]) << ',' << csv::format_double(rep.derivative[i]) << '\n';
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return kOk;
}

int cmd_analyze(const AnalyzeOpts& o) {
  if (!o.sensitivity.empty()) return analyze_sensitivity(o);
  if (std::find(kMetrics.begin(), kMetrics.end(), o.metric) == kMetrics.end())
    throw UsageError("unknown metric '" + o.metric + "'");
  if (o.runs.empty()) throw UsageError("--runs is required");
  return analyze_runs(o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic microsimulation of the England & Wales population"};
  app.require_subcommand(1);

  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write the built-in synthetic dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();

  CalibrateOpts cal;
  if (const char* env = std::getenv("DEMOSIM_DATA")) cal.data = env;
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate fertility, mortality and migration models");
  auto* data_opt = calibrate->add_option("--data", cal.data, "Dataset directory (default $DEMOSIM_DATA)");
  if (cal.data.empty()) data_opt->required();
  calibrate->add_option("--out", cal.out, "Models directory")->required();
  calibrate->add_option("--population", cal.population, "Simulated persons")->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", cal.seed, "Random seed");

  RunOpts ro;
  auto* runc = app.add_subcommand("run", "Simulate one scenario");
  runc->add_option("--scenario", ro.scenario, "Built-in name or key=value file");
  runc->add_option("--models", ro.models, "Models directory")->required();
  runc->add_option("--out", ro.out, "Output directory")->required();
  runc->add_option("--seed", ro.seed, "Random seed");
  runc->add_option("--population", ro.population, "Simulated persons")->check(CLI::PositiveNumber);
  runc->add_option("--steps", ro.steps, "Quarterly steps (default to 1 July 2041)")->check(CLI::NonNegativeNumber);
  runc->add_flag("--no-scenario", ro.no_scenario, "Disable the scenario layer");

  AnalyzeOpts ao;
  auto* analyze = app.add_subcommand("analyze", "Statistics over run outputs");
  analyze->add_option("--runs", ao.runs, "Run directories");
  analyze->add_option("--metric", ao.metric, "population, share, median-age, reproductive-share, sex-ratio, "
                                             "dependency-total, dependency-old-age, pyramid, decomposition");
  analyze->add_option("--filter", ao.filter, "e.g. sex=F;age=15-49;agg=eu-immigrant");
  analyze->add_option("--out", ao.out, "Output CSV (default stdout)");
  analyze->add_option("--sensitivity", ao.sensitivity, "f_enl, f_ex, f_em or f_ret");
  analyze->add_flag("--joint", ao.joint, "Perturb f_em and f_ret separately and together");
  analyze->add_option("--models", ao.models, "Models directory for sensitivity re-runs");
  analyze->add_option("--scenario", ao.scenario, "Scenario for sensitivity re-runs");
  analyze->add_option("--ethnicity", ao.ethnicity, "Group whose inflow f_enl sensitivity reports");
  analyze->add_option("--seed", ao.seed, "Random seed for re-runs");
  analyze->add_option("--population", ao.population, "Simulated persons for re-runs")->check(CLI::PositiveNumber);
  analyze->add_option("--steps", ao.steps, "Quarterly steps for re-runs")->check(CLI::NonNegativeNumber);
  analyze->add_option("--jobs", ao.jobs, "Parallel re-runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) {
      save_dataset(synthetic_dataset(), synth_out);
      std::cout << "synthetic dataset written to " << synth_out << '\n';
      return kOk;
    }
    if (*calibrate) return cmd_calibrate(cal);
    if (*runc) return cmd_run(ro);
    if (*analyze) return cmd_analyze(ao);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
