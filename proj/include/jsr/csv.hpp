#pragma once

// Minimal CSV support for the files this library writes: comma separated,
// header row, no quoting, '\n' line endings. Doubles use the shortest
// representation that parses back to the same value.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace jsr {

std::string format_double(double value);
/// Accepts everything format_double produces, including "inf", "-inf" and "nan".
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

/// Throws std::runtime_error when a row width differs from the header.
CsvTable read_csv(std::istream& in);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace jsr
