#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pgate::util {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Strict parsers: the whole token must be consumed.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delim);
std::vector<std::string_view> split_whitespace(std::string_view text);

} // namespace pgate::util
