#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gridbench {

// Header-first, comma separated, no quoting. Lines starting with '#' and
// blank lines are skipped.
struct CsvTable {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::size_t column_index(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::string location(std::size_t row, std::size_t column) const;
  std::vector<double> numeric_column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::filesystem::path& origin);

// Shortest representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, bool& ok);

}  // namespace gridbench
