#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace aloe {

/// Shortest decimal string that parses back to the same double. Non-finite
/// values print as nan, inf, -inf.
std::string format_double(double v);

/// Strict parsers; throw std::invalid_argument on trailing junk or overflow.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

/// Splits one CSV record. Quoted fields with doubled quotes are honoured;
/// embedded newlines are not supported.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace aloe
