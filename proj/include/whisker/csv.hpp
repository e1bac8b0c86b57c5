#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace whisker {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);
/// Fixed-point text with `digits` decimals, for human-facing tables.
std::string format_fixed(double v, int digits);

std::vector<std::string_view> split_csv_line(std::string_view line);
/// Throws std::invalid_argument if `text` is not entirely a number.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string join(const std::vector<std::string>& parts, char sep);

} // namespace whisker
