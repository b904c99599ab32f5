#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hpcfd {

std::vector<std::string> split_csv(const std::string& line);

/// Formats a double so that parsing the result recovers the exact value.
std::string format_double(double value);

/// Strict numeric parsing; throws std::runtime_error naming `line` on failure
/// or when the value is not finite.
double parse_double_field(std::string_view field, int line);
std::int64_t parse_int_field(std::string_view field, int line);

/// Line-oriented CSV reader. No quoting: fields must not contain commas, which
/// holds for every format in this toolkit (metric names are identifiers).
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next non-empty line into `fields`. Returns false at EOF.
  bool next_row(std::vector<std::string>& fields);

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

}  // namespace hpcfd
