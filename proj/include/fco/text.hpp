#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fco::text {

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Strict parsers: the whole field must be consumed. Throw std::invalid_argument.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);
unsigned long long parse_uint(std::string_view field);

}  // namespace fco::text
