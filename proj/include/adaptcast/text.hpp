#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adaptcast::text {

std::string_view trim(std::string_view s);

/// Splits on `sep`; fields are trimmed and a surrounding pair of double quotes removed.
std::vector<std::string> split(std::string_view line, char sep);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Decimal text with 10 significant digits.
std::string format_number(double v);

/// 17 significant digits; parses back to the same double.
std::string format_exact(double v);

std::string to_lower(std::string_view s);

}  // namespace adaptcast::text
