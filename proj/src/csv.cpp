#include "hpcfd/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <stdexcept>

namespace hpcfd {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_double_field(std::string_view field, int line) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw std::runtime_error("line " + std::to_string(line) +
                             ": unparseable numeric value '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error("line " + std::to_string(line) +
                             ": non-finite value '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_int_field(std::string_view field, int line) {
  std::int64_t value = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw std::runtime_error("line " + std::to_string(line) +
                             ": unparseable integer '" + std::string(field) + "'");
  }
  return value;
}

bool CsvReader::next_row(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields = split_csv(line);
    return true;
  }
  return false;
}

}  // namespace hpcfd
