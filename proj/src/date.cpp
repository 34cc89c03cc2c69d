#include "adaptcast/date.hpp"

#include <charconv>
#include <cstdio>

#include "adaptcast/errors.hpp"

namespace adaptcast {
namespace {

std::optional<int> parse_fixed_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<Date> build(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

}  // namespace

DateFormat parse_date_format(std::string_view name) {
    if (name == "iso" || name == "YYYY-MM-DD") return DateFormat::Iso;
    if (name == "dmy" || name == "DD/MM/YY") return DateFormat::DayMonth;
    throw ConfigError("unknown date format '" + std::string(name) + "' (expected iso or dmy)");
}

std::string_view to_string(DateFormat format) {
    return format == DateFormat::Iso ? "iso" : "dmy";
}

std::optional<Date> parse_date(std::string_view text, DateFormat format) {
    if (format == DateFormat::Iso) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
        auto y = parse_fixed_int(text.substr(0, 4));
        auto m = parse_fixed_int(text.substr(5, 2));
        auto d = parse_fixed_int(text.substr(8, 2));
        if (!y || !m || !d) return std::nullopt;
        return build(*y, *m, *d);
    }
    if (text.size() != 8 || text[2] != '/' || text[5] != '/') return std::nullopt;
    auto d = parse_fixed_int(text.substr(0, 2));
    auto m = parse_fixed_int(text.substr(3, 2));
    auto y = parse_fixed_int(text.substr(6, 2));
    if (!y || !m || !d) return std::nullopt;
    return build(2000 + *y, *m, *d);
}

Date parse_date_or_throw(std::string_view text, DateFormat format, std::string_view what) {
    auto date = parse_date(text, format);
    if (!date) {
        throw ConfigError(std::string(what) + ": invalid date '" + std::string(text) + "'");
    }
    return *date;
}

std::string format_iso(Date date) {
    std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace adaptcast
