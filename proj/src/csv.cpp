#include "csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace gridbench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.emplace_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t CsvTable::column_index(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    fail(ErrorCode::kValidation,
         path.string() + ": missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::string CsvTable::location(std::size_t row, std::size_t column) const {
  return path.string() + ":" + std::to_string(line_numbers[row]) + ", column '" +
         header[column] + "'";
}

std::vector<double> CsvTable::numeric_column(std::string_view name) const {
  const std::size_t col = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool ok = false;
    const double v = parse_double(rows[r][col], ok);
    if (!ok || !std::isfinite(v)) {
      fail(ErrorCode::kParse, location(r, col) + ": not a finite number: '" +
                                  rows[r][col] + "'");
    }
    out.push_back(v);
  }
  return out;
}

CsvTable parse_csv(std::string_view text, const std::filesystem::path& origin) {
  CsvTable table;
  table.path = origin;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        fail(ErrorCode::kParse, origin.string() + ":" + std::to_string(line_no) +
                                    ": expected " +
                                    std::to_string(table.header.size()) +
                                    " fields, found " + std::to_string(fields.size()));
      }
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_header) fail(ErrorCode::kParse, origin.string() + ": empty CSV file");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str(), path);
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view text, bool& ok) {
  double value = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  ok = result.ec == std::errc() && result.ptr == text.data() + text.size() &&
       !text.empty();
  return value;
}

}  // namespace gridbench
