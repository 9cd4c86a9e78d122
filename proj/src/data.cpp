#include "demosim/data.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "demosim/csv.hpp"

namespace demosim {

Axis Axis::range(Dim dim, int first, int last, bool flat) {
  Axis a{dim, {}, flat};
  for (int v = first; v <= last; ++v) a.values.push_back(v);
  return a;
}

RateTable::RateTable(std::vector<Axis> axes) : axes_(std::move(axes)) {
  std::size_t n = 1;
  for (const auto& a : axes_) {
    if (a.values.empty()) throw DomainError("rate table axis has no values");
    if (!std::is_sorted(a.values.begin(), a.values.end()))
      throw DomainError("rate table axis values must be ascending");
    if (a.flat && a.values.back() - a.values.front() + 1 != static_cast<int>(a.values.size()))
      throw DomainError("flat rate table axis must be contiguous");
    n *= a.values.size();
  }
  cells_.assign(n, std::nan(""));
}

const Axis& RateTable::axis(Dim d) const {
  for (const auto& a : axes_)
    if (a.dim == d) return a;
  throw DomainError("rate table has no such dimension");
}

bool RateTable::has_axis(Dim d) const {
  return std::any_of(axes_.begin(), axes_.end(), [d](const Axis& a) { return a.dim == d; });
}

std::size_t RateTable::offset(const Coords& c, bool clamp_flat) const {
  std::size_t off = 0;
  for (const auto& a : axes_) {
    auto v = c.get(a.dim);
    if (!v) throw DomainError("rate table lookup is missing a required dimension");
    std::size_t pos;
    if (a.flat) {
      int x = *v;
      if (clamp_flat) x = std::clamp(x, a.values.front(), a.values.back());
      else if (x < a.values.front() || x > a.values.back())
        throw DomainError("coordinate outside the declared table range");
      pos = static_cast<std::size_t>(x - a.values.front());
    } else {
      auto it = std::lower_bound(a.values.begin(), a.values.end(), *v);
      if (it == a.values.end() || *it != *v) throw DomainError("coordinate not present in table");
      pos = static_cast<std::size_t>(it - a.values.begin());
    }
    off = off * a.values.size() + pos;
  }
  return off;
}

double RateTable::lookup_flat(const Coords& c) const { return cells_[offset(c, true)]; }

Coords RateTable::clamp(const Coords& c) const {
  Coords out = c;
  for (const auto& a : axes_) {
    auto v = c.get(a.dim);
    if (v && a.flat) out.set(a.dim, std::clamp(*v, a.values.front(), a.values.back()));
  }
  return out;
}

bool RateTable::covers(const Coords& c) const {
  for (const auto& a : axes_) {
    auto v = c.get(a.dim);
    if (!v) return false;
    if (!a.flat && !std::binary_search(a.values.begin(), a.values.end(), *v)) return false;
  }
  return true;
}

void RateTable::set(const Coords& c, double value) { cells_[offset(c, false)] = value; }

bool RateTable::is_set(const Coords& c) const { return !std::isnan(cells_[offset(c, false)]); }

std::vector<std::pair<Coords, double>> RateTable::cells() const {
  std::vector<std::pair<Coords, double>> out;
  out.reserve(cells_.size());
  std::vector<std::size_t> pos(axes_.size(), 0);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    Coords c;
    for (std::size_t k = 0; k < axes_.size(); ++k) c.set(axes_[k].dim, axes_[k].values[pos[k]]);
    out.emplace_back(c, cells_[i]);
    for (std::size_t k = axes_.size(); k-- > 0;) {
      if (++pos[k] < axes_[k].values.size()) break;
      pos[k] = 0;
    }
  }
  return out;
}

void CensusTable::set(int year, const SAEKey& key, std::int64_t count) {
  auto& v = years_[year];
  if (v.empty()) v.assign(static_cast<std::size_t>(indexer_.size()), 0);
  v[static_cast<std::size_t>(indexer_.index(key))] = count;
}

void CensusTable::set_cells(int year, std::vector<std::int64_t> counts) {
  if (counts.size() != static_cast<std::size_t>(indexer_.size()))
    throw DomainError("census cell vector has the wrong size");
  years_[year] = std::move(counts);
}

std::int64_t CensusTable::count(int year, const SAEKey& key) const {
  return cells(year)[static_cast<std::size_t>(indexer_.index(key))];
}

std::vector<int> CensusTable::years() const {
  std::vector<int> out;
  for (const auto& [y, _] : years_) out.push_back(y);
  return out;
}

std::int64_t CensusTable::total(int year) const {
  const auto& c = cells(year);
  std::int64_t t = 0;
  for (auto v : c) t += v;
  return t;
}

const std::vector<std::int64_t>& CensusTable::cells(int year) const {
  auto it = years_.find(year);
  if (it == years_.end()) throw DomainError("census has no year " + std::to_string(year));
  return it->second;
}

namespace {

struct ParsedCell {
  Coords coords;
  double value;
  std::size_t line;
};

std::string describe(const Coords& c, const EthnicCodebook& book) {
  std::string out;
  auto add = [&](const std::string& s) {
    if (!out.empty()) out += ", ";
    out += s;
  };
  if (auto v = c.get(Dim::Sex)) add(std::string("sex ") + std::string(sex_code(static_cast<Sex>(*v))));
  if (auto v = c.get(Dim::AgeGroup)) add("age_group " + AgeGroup(*v).label());
  if (auto v = c.get(Dim::Ethnicity))
    add("ethnicity " + (*v == kAllEthnicities ? std::string("All")
                                              : book.name(EthnicGroup{static_cast<std::uint8_t>(*v)})));
  if (auto v = c.get(Dim::BirthYear)) add("mother_birth_year " + std::to_string(*v));
  if (auto v = c.get(Dim::Year)) add("year " + std::to_string(*v));
  return out;
}

/// Builds a dense table from parsed rows; flat dims span min..max.
RateTable assemble(const std::string& file, const std::vector<std::pair<Dim, bool>>& dims,
                   const std::vector<ParsedCell>& rows, const EthnicCodebook& book,
                   std::vector<std::string>& issues) {
  if (rows.empty()) {
    issues.push_back(file + ": no data rows");
    return {};
  }
  std::vector<Axis> axes;
  for (auto [dim, flat] : dims) {
    std::set<int> seen;
    for (const auto& r : rows) seen.insert(*r.coords.get(dim));
    if (flat)
      axes.push_back(Axis::range(dim, *seen.begin(), *seen.rbegin(), true));
    else
      axes.push_back(Axis{dim, std::vector<int>(seen.begin(), seen.end()), false});
  }
  RateTable t(std::move(axes));
  for (const auto& r : rows) {
    if (t.is_set(r.coords)) {
      issues.push_back(file + ":" + std::to_string(r.line) + ": duplicate cell (" +
                       describe(r.coords, book) + ")");
      continue;
    }
    t.set(r.coords, r.value);
  }
  std::size_t missing = 0;
  for (const auto& [c, v] : t.cells()) {
    if (!std::isnan(v)) continue;
    if (++missing <= 20) issues.push_back(file + ": missing cell (" + describe(c, book) + ")");
  }
  if (missing > 20)
    issues.push_back(file + ": " + std::to_string(missing - 20) + " further missing cells");
  return t;
}

/// Column parsers: each reports into `issues` and returns false on failure.
class RowParser {
 public:
  RowParser(const csv::Table& t, const csv::Row& r, const EthnicCodebook& book,
            std::vector<std::string>& issues)
      : file_(t.path.filename().string()), row_(r), book_(book), issues_(issues) {}

  bool width(std::size_t n) {
    if (row_.fields.size() == n) return true;
    return fail("expected " + std::to_string(n) + " fields, got " + std::to_string(row_.fields.size()));
  }
  bool integer(std::size_t col, int& out) {
    std::int64_t v;
    if (!csv::parse_int(row_.fields[col], v)) return fail("malformed integer '" + row_.fields[col] + "'");
    out = static_cast<int>(v);
    return true;
  }
  bool count(std::size_t col, std::int64_t& out) {
    if (!csv::parse_int(row_.fields[col], out)) return fail("malformed count '" + row_.fields[col] + "'");
    if (out < 0) return fail("negative count " + row_.fields[col]);
    return true;
  }
  bool rate(std::size_t col, double& out, double hi) {
    if (!csv::parse_double(row_.fields[col], out) || !std::isfinite(out))
      return fail("malformed number '" + row_.fields[col] + "'");
    if (out < 0.0 || out > hi) {
      return fail("value " + row_.fields[col] + " outside [0, " +
                  (std::isinf(hi) ? std::string("inf") : csv::format_double(hi)) + "]");
    }
    return true;
  }
  bool age_group(std::size_t col, int& out) {
    try {
      out = AgeGroup::parse(row_.fields[col]).index();
      return true;
    } catch (const DomainError&) {
      return fail("bad age group '" + row_.fields[col] + "'");
    }
  }
  bool sex(std::size_t col, int& out) {
    try {
      out = static_cast<int>(parse_sex(row_.fields[col]));
      return true;
    } catch (const DomainError&) {
      return fail("bad sex '" + row_.fields[col] + "'");
    }
  }
  bool ethnicity(std::size_t col, int& out, bool allow_all) {
    if (allow_all && row_.fields[col] == "All") {
      out = kAllEthnicities;
      return true;
    }
    if (auto g = book_.find(row_.fields[col])) {
      out = g->code;
      return true;
    }
    return fail("unknown ethnicity '" + row_.fields[col] + "'");
  }

 private:
  bool fail(const std::string& msg) {
    issues_.push_back(file_ + ":" + std::to_string(row_.line) + ": " + msg);
    return false;
  }
  std::string file_;
  const csv::Row& row_;
  const EthnicCodebook& book_;
  std::vector<std::string>& issues_;
};

constexpr double kUnbounded = INFINITY;

/// Reads a file; a missing file or bad header becomes an issue.
std::optional<csv::Table> read_into(const std::filesystem::path& p, std::string_view header,
                                    std::vector<std::string>& issues) {
  try {
    return csv::read(p, header);
  } catch (const DataError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    return std::nullopt;
  }
}

std::string year_str(const Coords& c, Dim d) { return std::to_string(*c.get(d)); }

void write_rate_table(const RateTable& t, const std::filesystem::path& file, std::string_view header,
                      const std::vector<Dim>& columns, const EthnicCodebook& book) {
  csv::Writer w(file, header);
  for (const auto& [c, v] : t.cells()) {
    for (Dim d : columns) {
      const int x = *c.get(d);
      switch (d) {
        case Dim::Sex: w.field(sex_code(static_cast<Sex>(x))); break;
        case Dim::AgeGroup: w.field(AgeGroup(x).label()); break;
        case Dim::Ethnicity:
          w.field(x == kAllEthnicities ? std::string("All")
                                       : book.name(EthnicGroup{static_cast<std::uint8_t>(x)}));
          break;
        default: w.field(year_str(c, d)); break;
      }
    }
    w.field(v);
    w.end_row();
  }
}

}  // namespace

CensusTable load_census(const std::filesystem::path& file, const EthnicCodebook& book) {
  std::vector<std::string> issues;
  CensusTable census(book.size());
  auto t = read_into(file, "year,sex,age_group,ethnicity,count", issues);
  if (t) {
    std::map<int, std::vector<bool>> filled;
    for (const auto& r : t->rows) {
      RowParser p(*t, r, book, issues);
      int year = 0, sex = 0, ag = 0, eth = 0;
      std::int64_t count = 0;
      if (!p.width(5)) continue;
      bool ok = p.integer(0, year);
      ok = p.sex(1, sex) && ok;
      ok = p.age_group(2, ag) && ok;
      ok = p.ethnicity(3, eth, false) && ok;
      ok = p.count(4, count) && ok;
      if (!ok) continue;
      const SAEKey key{static_cast<Sex>(sex), AgeGroup(ag), EthnicGroup{static_cast<std::uint8_t>(eth)}};
      auto& f = filled[year];
      if (f.empty()) f.assign(static_cast<std::size_t>(census.indexer().size()), false);
      const auto i = static_cast<std::size_t>(census.indexer().index(key));
      if (f[i]) {
        issues.push_back(file.filename().string() + ":" + std::to_string(r.line) + ": duplicate cell");
        continue;
      }
      f[i] = true;
      census.set(year, key, count);
    }
    for (const auto& [year, f] : filled) {
      const auto missing = std::count(f.begin(), f.end(), false);
      if (missing > 0)
        issues.push_back(file.filename().string() + ": census " + std::to_string(year) + " is missing " +
                         std::to_string(missing) + " of " + std::to_string(f.size()) + " SAE cells");
    }
  }
  if (!issues.empty()) throw DataError(std::move(issues));
  return census;
}

void save_census(const CensusTable& census, const EthnicCodebook& book,
                 const std::filesystem::path& file) {
  csv::Writer w(file, "year,sex,age_group,ethnicity,count");
  for (int year : census.years()) {
    const auto& cells = census.cells(year);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const SAEKey k = census.indexer().key(static_cast<int>(i));
      w.field(year).field(sex_code(k.sex)).field(k.age_group.label()).field(book.name(k.ethnicity));
      w.field(cells[i]);
      w.end_row();
    }
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::vector<std::string> issues;
  Dataset data;

  const auto codebook_file = dir / "ethnicities.csv";
  if (std::filesystem::exists(codebook_file)) {
    auto t = read_into(codebook_file, "name", issues);
    if (t) {
      std::vector<std::string> names;
      for (const auto& r : t->rows) names.push_back(r.fields.at(0));
      data.codebook = EthnicCodebook(std::move(names));
    }
  } else {
    data.codebook = EthnicCodebook::ons2011();
  }
  const EthnicCodebook& book = data.codebook;

  auto load_table = [&](const std::string& name, std::string_view header,
                        const std::vector<std::pair<Dim, bool>>& dims, double hi,
                        const std::function<bool(RowParser&, Coords&)>& parse_coords) {
    auto t = read_into(dir / name, header, issues);
    if (!t) return RateTable{};
    std::vector<ParsedCell> cells;
    const std::size_t value_col = dims.size();
    for (const auto& r : t->rows) {
      RowParser p(*t, r, book, issues);
      if (!p.width(value_col + 1)) continue;
      Coords c;
      double v;
      bool ok = parse_coords(p, c);
      ok = p.rate(value_col, v, hi) && ok;
      if (ok) cells.push_back({c, v, r.line});
    }
    return assemble(name, dims, cells, book, issues);
  };

  data.fertility.birth_rates = load_table(
      "birth_rates.csv", "age_group,mother_birth_year,rate",
      {{Dim::AgeGroup, true}, {Dim::BirthYear, true}}, kUnbounded, [](RowParser& p, Coords& c) {
        int ag = 0, by = 0;
        bool ok = p.age_group(0, ag);
        ok = p.integer(1, by) && ok;
        c.set(Dim::AgeGroup, ag).set(Dim::BirthYear, by);
        return ok;
      });
  data.fertility.tfr = load_table(
      "tfr.csv", "ethnicity,year,tfr", {{Dim::Ethnicity, false}, {Dim::Year, true}}, kUnbounded,
      [](RowParser& p, Coords& c) {
        int eth = 0, y = 0;
        bool ok = p.ethnicity(0, eth, true);
        ok = p.integer(1, y) && ok;
        c.set(Dim::Ethnicity, eth).set(Dim::Year, y);
        return ok;
      });
  data.fertility.multiplicity = load_table(
      "multiplicity.csv", "age_group,year,twin_prob", {{Dim::AgeGroup, true}, {Dim::Year, true}}, 1.0,
      [](RowParser& p, Coords& c) {
        int ag = 0, y = 0;
        bool ok = p.age_group(0, ag);
        ok = p.integer(1, y) && ok;
        c.set(Dim::AgeGroup, ag).set(Dim::Year, y);
        return ok;
      });
  data.fertility.male_share = load_table("sex_ratio.csv", "year,male_share", {{Dim::Year, true}}, 1.0,
                                         [](RowParser& p, Coords& c) {
                                           int y = 0;
                                           bool ok = p.integer(0, y);
                                           c.set(Dim::Year, y);
                                           return ok;
                                         });
  data.mortality.rates = load_table(
      "mortality.csv", "sex,age_group,year,rate",
      {{Dim::Sex, false}, {Dim::AgeGroup, true}, {Dim::Year, true}}, 1.0, [](RowParser& p, Coords& c) {
        int s = 0, ag = 0, y = 0;
        bool ok = p.sex(0, s);
        ok = p.age_group(1, ag) && ok;
        ok = p.integer(2, y) && ok;
        c.set(Dim::Sex, s).set(Dim::AgeGroup, ag).set(Dim::Year, y);
        return ok;
      });
  try {
    data.census = load_census(dir / "census.csv", book);
  } catch (const DataError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  if (!issues.empty()) throw DataError(std::move(issues));
  validate(data);
  return data;
}

void validate(const Dataset& data) {
  std::vector<std::string> issues;
  auto check = [&](const RateTable& t, const std::string& name, double hi) {
    if (t.size() == 0) {
      issues.push_back(name + ": table is empty");
      return;
    }
    for (const auto& [c, v] : t.cells()) {
      if (!(v >= 0.0 && v <= hi))
        issues.push_back(name + ": value " + csv::format_double(v) + " out of domain (" +
                         describe(c, data.codebook) + ")");
    }
  };
  check(data.fertility.birth_rates, "birth_rates.csv", kUnbounded);
  check(data.fertility.tfr, "tfr.csv", kUnbounded);
  check(data.fertility.multiplicity, "multiplicity.csv", 1.0);
  check(data.fertility.male_share, "sex_ratio.csv", 1.0);
  check(data.mortality.rates, "mortality.csv", 1.0);

  if (data.fertility.tfr.size() > 0) {
    const auto& eth = data.fertility.tfr.axis(Dim::Ethnicity).values;
    if (!std::binary_search(eth.begin(), eth.end(), kAllEthnicities))
      issues.push_back("tfr.csv: no 'All' rows giving the England & Wales average TFR");
  }
  if (data.mortality.rates.size() > 0 && data.mortality.rates.axis(Dim::Sex).values.size() != 2)
    issues.push_back("mortality.csv: rates for both sexes are required");
  if (data.census.indexer().ethnic_count() != data.codebook.size())
    issues.push_back("census.csv: ethnicity count does not match the codebook");
  for (int y : kCensusYears) {
    if (!data.census.has_year(y)) {
      issues.push_back("census.csv: no rows for census year " + std::to_string(y) +
                       "; migration calibration impossible");
    } else if (data.census.total(y) <= 0) {
      issues.push_back("census.csv: census year " + std::to_string(y) + " is empty");
    }
  }
  if (!issues.empty()) throw DataError(std::move(issues));
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& book = data.codebook;
  {
    csv::Writer w(dir / "ethnicities.csv", "name");
    for (const auto& n : book.names()) {
      w.field(n);
      w.end_row();
    }
  }
  write_rate_table(data.fertility.birth_rates, dir / "birth_rates.csv", "age_group,mother_birth_year,rate",
                   {Dim::AgeGroup, Dim::BirthYear}, book);
  write_rate_table(data.fertility.tfr, dir / "tfr.csv", "ethnicity,year,tfr", {Dim::Ethnicity, Dim::Year},
                   book);
  write_rate_table(data.fertility.multiplicity, dir / "multiplicity.csv", "age_group,year,twin_prob",
                   {Dim::AgeGroup, Dim::Year}, book);
  write_rate_table(data.fertility.male_share, dir / "sex_ratio.csv", "year,male_share", {Dim::Year}, book);
  write_rate_table(data.mortality.rates, dir / "mortality.csv", "sex,age_group,year,rate",
                   {Dim::Sex, Dim::AgeGroup, Dim::Year}, book);
  save_census(data.census, book, dir / "census.csv");
}

}  // namespace demosim
