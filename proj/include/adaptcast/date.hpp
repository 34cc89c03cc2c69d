#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace adaptcast {

using Date = std::chrono::sys_days;

enum class DateFormat {
    Iso,       // YYYY-MM-DD
    DayMonth,  // DD/MM/YY, two-digit years are 20xx
};

DateFormat parse_date_format(std::string_view name);
std::string_view to_string(DateFormat format);

/// Returns nullopt for anything that is not a valid calendar date in `format`.
std::optional<Date> parse_date(std::string_view text, DateFormat format);

/// Throws ConfigError naming `what` on failure.
Date parse_date_or_throw(std::string_view text, DateFormat format, std::string_view what);

std::string format_iso(Date date);

inline Date make_date(int y, unsigned m, unsigned d) {
    return std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
}

}  // namespace adaptcast
