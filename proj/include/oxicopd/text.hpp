#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oxicopd::text {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep = ',');

/// Strict decimal parse of the whole (trimmed) field.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

} // namespace oxicopd::text
