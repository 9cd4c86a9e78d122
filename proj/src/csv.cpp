#include "demosim/csv.hpp"

#include <charconv>
#include <system_error>

#include "demosim/core.hpp"

namespace demosim::csv {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

bool parse_int(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

Table read(const std::filesystem::path& path, std::string_view expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError({"missing file " + path.string()});
  Table t;
  t.path = path;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (!expected_header.empty() && line != expected_header)
        throw DataError({path.filename().string() + ":1: header '" + line + "', expected '" +
                         std::string(expected_header) + "'"});
      t.header = split(line);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    t.rows.push_back(Row{lineno, split(line)});
  }
  if (!have_header) throw DataError({path.filename().string() + ": empty file"});
  return t;
}

Writer::Writer(const std::filesystem::path& path, std::string_view header) : out_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << header << '\n';
}

Writer& Writer::field(std::string_view v) {
  if (!first_) line_ += ',';
  line_ += v;
  first_ = false;
  return *this;
}

Writer& Writer::field(double v) { return field(std::string_view(format_double(v))); }

Writer& Writer::field(std::int64_t v) { return field(std::string_view(std::to_string(v))); }

void Writer::end_row() {
  line_ += '\n';
  out_ << line_;
  line_.clear();
  first_ = true;
}

}  // namespace demosim::csv
