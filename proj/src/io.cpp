#include "demosim/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "demosim/csv.hpp"

namespace demosim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scenario_json(const ScenarioConfig& s) {
  return {{"name", s.name},
          {"brexit", s.brexit},
          {"f_enl", s.f_enl},
          {"f_ex", s.f_ex},
          {"f_em", s.f_em},
          {"f_ret", s.f_ret},
          {"referendum", s.referendum.to_string()},
          {"brexit_date", s.brexit_date.to_string()},
          {"wave_start", s.wave_start().to_string()},
          {"wave_end", s.wave_end().to_string()},
          {"enlargement_start", s.enlargement_start},
          {"enlargement_years", s.enlargement_years},
          {"eu_emigration_share", s.eu_emigration_share}};
}

void write_events(const EventLedger& ledger, const EthnicCodebook& book, const fs::path& file, bool pool) {
  csv::Writer w(file, "date,sex,age_group,ethnicity,births,deaths,immigrants,emigrants");
  const CellIndexer& idx = ledger.indexer();
  for (std::size_t t = 0; t < ledger.steps(); ++t) {
    const auto& ev = pool ? ledger.pool_events(t) : ledger.living_events(t);
    const std::string date = ledger.date(t).to_string();
    for (int c = 0; c < idx.size(); ++c) {
      const CellEvents& e = ev[static_cast<std::size_t>(c)];
      if (e == CellEvents{}) continue;
      const SAEKey k = idx.key(c);
      w.field(date).field(sex_code(k.sex)).field(k.age_group.label()).field(book.name(k.ethnicity));
      w.field(e.births).field(e.deaths).field(e.immigrants).field(e.emigrants);
      w.end_row();
    }
  }
}

using StepEvents = std::vector<std::vector<CellEvents>>;

void read_events(StepEvents& steps, const EthnicCodebook& book, const fs::path& file,
                 const std::map<SimDate, std::size_t>& step_of) {
  const CellIndexer idx(book.size());
  const auto t = csv::read(file, "date,sex,age_group,ethnicity,births,deaths,immigrants,emigrants");
  std::vector<std::string> issues;
  for (const auto& r : t.rows) {
    const std::string where = file.filename().string() + ":" + std::to_string(r.line) + ": ";
    try {
      if (r.fields.size() != 8) throw DomainError("expected 8 fields");
      const SimDate d = SimDate::parse(r.fields[0]);
      auto it = step_of.find(d);
      if (it == step_of.end()) throw DomainError("date not on the run's step grid");
      const SAEKey key{parse_sex(r.fields[1]), AgeGroup::parse(r.fields[2]), book.at(r.fields[3])};
      std::int64_t v[4];
      for (int i = 0; i < 4; ++i)
        if (!csv::parse_int(r.fields[static_cast<std::size_t>(4 + i)], v[i])) throw DomainError("bad count");
      steps[it->second][static_cast<std::size_t>(idx.index(key))] = CellEvents{v[0], v[1], v[2], v[3]};
    } catch (const DomainError& e) {
      issues.push_back(where + e.what());
    }
  }
  if (!issues.empty()) throw DataError(std::move(issues));
}

}  // namespace

void write_run(const RunResult& r, const EthnicCodebook& book, const fs::path& dir) {
  fs::create_directories(dir);
  {
    csv::Writer w(dir / "snapshots.csv", "date,sex,age_group,ethnicity,pool,count");
    const CellIndexer idx(book.size());
    for (const auto& s : r.snapshots) {
      const std::string date = s.date.to_string();
      for (int pool = 0; pool < 2; ++pool) {
        const auto banded = s.banded(pool == 1);
        for (int c = 0; c < idx.size(); ++c) {
          const SAEKey k = idx.key(c);
          w.field(date).field(sex_code(k.sex)).field(k.age_group.label()).field(book.name(k.ethnicity));
          w.field(pool).field(banded[static_cast<std::size_t>(c)]);
          w.end_row();
        }
      }
    }
  }
  {
    csv::Writer w(dir / "age_snapshots.csv", "date,sex,age,ethnicity,pool,count");
    for (const auto& s : r.snapshots) {
      const std::string date = s.date.to_string();
      for (int pool = 0; pool < 2; ++pool)
        for (int sx = 0; sx < kSexCount; ++sx)
          for (int a = 0; a < kAgeCount; ++a)
            for (int e = 0; e < book.size(); ++e) {
              const EthnicGroup g{static_cast<std::uint8_t>(e)};
              const auto n = s.at(static_cast<Sex>(sx), a, g, pool == 1);
              if (n == 0) continue;
              w.field(date).field(sex_code(static_cast<Sex>(sx))).field(a).field(book.name(g));
              w.field(pool).field(n);
              w.end_row();
            }
    }
  }
  write_events(r.ledger, book, dir / "events.csv", false);
  write_events(r.ledger, book, dir / "pool_events.csv", true);
  {
    csv::Writer w(dir / "exodus.csv", "date,eligible,selected,children,earliest_selected_arrival,latest_remaining_arrival");
    for (const auto& e : r.exodus) {
      w.field(e.date.to_string()).field(e.eligible).field(static_cast<std::int64_t>(e.selected.size())).field(e.children);
      if (e.selected_arrivals.empty()) w.field(std::string_view{});
      else w.field(std::min_element(e.selected_arrivals.begin(), e.selected_arrivals.end())->to_string());
      w.field(e.latest_remaining_arrival ? e.latest_remaining_arrival->to_string() : std::string{});
      w.end_row();
    }
  }
  json m;
  m["version"] = kVersion;
  m["seed"] = r.config.seed;
  m["population_size"] = r.config.population_size;
  m["scale_factor"] = r.scale_factor;
  m["start"] = r.config.start.to_string();
  m["end"] = r.config.end.to_string();
  m["steps"] = r.config.steps();
  m["migration"] = r.config.migration;
  m["scenario"] = r.config.scenario ? scenario_json(*r.config.scenario) : json(nullptr);
  m["models_fingerprint"] = r.models_fingerprint;
  m["ethnicities"] = book.names();
  json snaps = json::array();
  for (const auto& s : r.snapshots) snaps.push_back(s.date.to_string());
  m["snapshot_dates"] = snaps;
  m["wave_totals"] = {{"exodus", r.wave_totals.exodus}, {"returns", r.wave_totals.returns}};
  m["return_shortfall"] = r.return_shortfall;
  m["warnings"] = r.warnings;
  m["notes"] = {"reproductive age is bands 15-49 plus a fifth of 50-54",
                "working age is bands 15-64 plus a fifth of 65-69"};
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

const Snapshot* LoadedRun::snapshot_at(SimDate d) const {
  for (const auto& s : snapshots)
    if (s.date == d) return &s;
  return nullptr;
}

LoadedRun read_run(const fs::path& dir) {
  LoadedRun run;
  run.dir = dir;
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError({"missing file " + (dir / "manifest.json").string()});
  std::stringstream buf;
  buf << in.rdbuf();
  run.manifest = buf.str();
  json m;
  try {
    m = json::parse(run.manifest);
    run.codebook = EthnicCodebook(m.at("ethnicities").get<std::vector<std::string>>());
    const EthnicCodebook& book = run.codebook;
    run.seed = m.at("seed").get<std::uint64_t>();
    run.scale_factor = m.at("scale_factor").get<double>();
    run.scenario = m.at("scenario").is_null() ? "none" : m.at("scenario").at("name").get<std::string>();
    const SimDate start = SimDate::parse(m.at("start").get<std::string>());
    const int steps = m.at("steps").get<int>();
    run.ledger = EventLedger(book.size());
    const auto cells = static_cast<std::size_t>(CellIndexer(book.size()).size());
    std::map<SimDate, std::size_t> step_of;
    for (int t = 0; t < steps; ++t) step_of[start + t] = static_cast<std::size_t>(t);
    StepEvents living(static_cast<std::size_t>(steps), std::vector<CellEvents>(cells));
    StepEvents pool = living;
    read_events(living, book, dir / "events.csv", step_of);
    read_events(pool, book, dir / "pool_events.csv", step_of);
    for (int t = 0; t < steps; ++t)
      run.ledger.append_step(start + t, std::move(living[static_cast<std::size_t>(t)]),
                             std::move(pool[static_cast<std::size_t>(t)]));
    std::map<SimDate, std::size_t> snap_of;
    for (const auto& d : m.at("snapshot_dates")) {
      const SimDate sd = SimDate::parse(d.get<std::string>());
      snap_of[sd] = run.snapshots.size();
      run.snapshots.emplace_back(sd, book.size());
    }
    const auto t = csv::read(dir / "age_snapshots.csv", "date,sex,age,ethnicity,pool,count");
    std::vector<std::string> issues;
    for (const auto& r : t.rows) {
      try {
        if (r.fields.size() != 6) throw DomainError("expected 6 fields");
        auto it = snap_of.find(SimDate::parse(r.fields[0]));
        if (it == snap_of.end()) throw DomainError("snapshot date not in the manifest");
        std::int64_t age, pool, count;
        if (!csv::parse_int(r.fields[2], age) || age < 0 || age > kMaxAge) throw DomainError("bad age");
        if (!csv::parse_int(r.fields[4], pool) || !csv::parse_int(r.fields[5], count)) throw DomainError("bad count");
        Snapshot& s = run.snapshots[it->second];
        (pool ? s.pool : s.living)[s.index(parse_sex(r.fields[1]), static_cast<int>(age), book.at(r.fields[3]))] = count;
      } catch (const DomainError& e) {
        issues.push_back("age_snapshots.csv:" + std::to_string(r.line) + ": " + e.what());
      }
    }
    if (!issues.empty()) throw DataError(std::move(issues));
  } catch (const json::exception& e) {
    throw DataError({"manifest.json: " + std::string(e.what())});
  } catch (const DomainError& e) {
    throw DataError({"manifest.json: " + std::string(e.what())});
  }
  return run;
}

void save_models(const Models& models, const Dataset& data, const MigrationCalibration& migration,
                 const CalibrationInfo& info, const fs::path& dir) {
  fs::create_directories(dir);
  save_dataset(data, dir / "data");
  {
    csv::Writer w(dir / "fertility_hazard.csv", "age_group,mother_birth_year,hazard");
    for (const auto& [c, h] : models.fertility.base_hazard.cells())
      w.field(AgeGroup(*c.get(Dim::AgeGroup)).label()).field(*c.get(Dim::BirthYear)).field(h), w.end_row();
  }
  {
    csv::Writer w(dir / "fertility_scale.csv", "ethnicity,year,scale");
    if (models.fertility.ethnicity_scale.size() > 0)
      for (const auto& [c, v] : models.fertility.ethnicity_scale.cells())
        w.field(models.codebook.name(EthnicGroup{static_cast<std::uint8_t>(*c.get(Dim::Ethnicity))}))
            .field(*c.get(Dim::Year))
            .field(v),
            w.end_row();
  }
  {
    csv::Writer w(dir / "mortality_curves.csv", "sex,birth_year,age,hazard");
    for (const auto& curve : models.mortality.all())
      for (int a = 0; a < kAgeCount; ++a)
        w.field(sex_code(curve.sex)).field(curve.birth_year).field(a).field(curve.hazard[static_cast<std::size_t>(a)]),
            w.end_row();
  }
  models.migration.save(dir / "migration_schedule.csv", models.codebook);
  json c;
  c["version"] = kVersion;
  c["seed"] = info.seed;
  c["population_size"] = info.population_size;
  c["rescale"] = migration.rescale;
  c["models_fingerprint"] = models_fingerprint(models);
  int fallbacks = 0;
  double abs_net = 0;
  for (const auto& e : migration.cohorts) {
    fallbacks += e.relative_fallback ? 1 : 0;
    abs_net += std::abs(e.net_migration);
  }
  c["cohorts"] = migration.cohorts.size();
  c["relative_fallbacks"] = fallbacks;
  c["total_abs_net_migration"] = abs_net;
  std::ofstream(dir / "calibration.json") << c.dump(2) << '\n';
  csv::Writer w(dir / "migration_estimates.csv",
                "sex,ethnicity,base_age_group,decade_start,sim_start,census_start,sim_end,census_end,net_migration,law,k");
  for (const auto& e : migration.cohorts) {
    w.field(sex_code(e.cohort.sex)).field(models.codebook.name(e.cohort.ethnicity))
        .field(base_band_label(e.cohort.base_band)).field(e.cohort.decade_start)
        .field(e.sim_start).field(e.census_start).field(e.sim_end).field(e.census_end)
        .field(e.net_migration).field(law_name(e.law)).field(e.k);
    w.end_row();
  }
}

Models load_models(const fs::path& dir) {
  const Dataset data = load_dataset(dir / "data");
  Models m = calibrate_vital_models(data);
  m.migration = MigrationSchedule::load(dir / "migration_schedule.csv", data.codebook);
  return m;
}

}  // namespace demosim
