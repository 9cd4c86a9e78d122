// Minimal comma-separated reader/writer for the flat, unquoted schemas used
// by the dataset and result files.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace demosim::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, std::int64_t& out);

struct Row {
  std::size_t line = 0;  // 1-based, header is line 1
  std::vector<std::string> fields;
};

struct Table {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<Row> rows;
};

/// Reads a whole file. Throws DataError if the file is missing or the
/// header differs from `expected_header` (when given).
Table read(const std::filesystem::path& path, std::string_view expected_header = {});

class Writer {
 public:
  Writer(const std::filesystem::path& path, std::string_view header);
  Writer& field(std::string_view v);
  Writer& field(double v);
  Writer& field(std::int64_t v);
  Writer& field(int v) { return field(static_cast<std::int64_t>(v)); }
  void end_row();

 private:
  std::ofstream out_;
  std::string line_;
  bool first_ = true;
};

}  // namespace demosim::csv
