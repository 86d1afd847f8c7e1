#pragma once

#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "fleetmine/error.hpp"

namespace fleetmine {

// Calendar date. Source tables carry "YYYY-MM-DD" and
// "YYYY-MM-DD HH:MM:SS"; the time-of-day part is validated and dropped.
struct Date {
    int year = 0;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    friend auto operator<=>(const Date&, const Date&) = default;

    // Months since year 0, for contiguous month-bin arithmetic.
    int month_index() const { return year * 12 + (month - 1); }
};

namespace detail {

inline bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
    static constexpr int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return d[m - 1];
}

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

} // namespace detail

inline Date parse_date(std::string_view text) {
    const auto fail = [&] { throw ParseError("bad date: '" + std::string(text) + "'"); };

    std::string_view date_part = text;
    if (const auto sp = text.find(' '); sp != std::string_view::npos) {
        date_part = text.substr(0, sp);
        std::string_view time_part = text.substr(sp + 1);
        if (time_part.size() != 8 || time_part[2] != ':' || time_part[5] != ':' ||
            !detail::all_digits(time_part.substr(0, 2)) ||
            !detail::all_digits(time_part.substr(3, 2)) ||
            !detail::all_digits(time_part.substr(6, 2)))
            fail();
    }
    if (date_part.size() != 10 || date_part[4] != '-' || date_part[7] != '-') fail();
    const auto ys = date_part.substr(0, 4);
    const auto ms = date_part.substr(5, 2);
    const auto ds = date_part.substr(8, 2);
    if (!detail::all_digits(ys) || !detail::all_digits(ms) || !detail::all_digits(ds)) fail();

    Date d{detail::to_int(ys), detail::to_int(ms), detail::to_int(ds)};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > detail::days_in_month(d.year, d.month))
        fail();
    return d;
}

inline std::string format_date(Date d) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

inline std::string month_label(int month_index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", month_index / 12, month_index % 12 + 1);
    return buf;
}

} // namespace fleetmine
