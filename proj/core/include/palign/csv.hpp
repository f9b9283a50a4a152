#pragma once

// Minimal locale-independent CSV helpers shared by the file formats
// (score grids, group files, label files, plot-ready outputs).

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace palign::csv {

std::string_view trim(std::string_view text) noexcept;

/// Splits on `sep` and trims each field. No quoting support.
std::vector<std::string> split(std::string_view line, char sep = ',');

/// Non-empty lines of `in` with trailing CR removed.
std::vector<std::string> read_lines(std::istream& in);

/// Parse helpers; throw a format error mentioning `what` on bad input.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

/// Shortest-to-17-significant-digit decimal rendering with '.' separator.
std::string format_double(double value, int significant_digits = 17);

}  // namespace palign::csv
