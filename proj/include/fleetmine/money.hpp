#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>

#include "fleetmine/error.hpp"

namespace fleetmine {

// USD amount held as integer cents. Table-style decorations ("$20,456",
// "1,234.50") are accepted on parse; arithmetic stays exact to the cent.
struct Money {
    std::int64_t cents = 0;

    double dollars() const { return static_cast<double>(cents) / 100.0; }

    friend Money operator+(Money a, Money b) { return Money{a.cents + b.cents}; }
    friend auto operator<=>(const Money&, const Money&) = default;
};

inline Money parse_money(std::string_view text) {
    std::string digits;
    digits.reserve(text.size());
    bool negative = false;
    bool seen_dot = false;
    int frac_digits = 0;
    bool any_digit = false;
    for (char c : text) {
        if (c == '$' || c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '-' && !any_digit && !negative && !seen_dot) {
            negative = true;
            continue;
        }
        if (c == '.') {
            if (seen_dot) throw ParseError("bad money value: '" + std::string(text) + "'");
            seen_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError("bad money value: '" + std::string(text) + "'");
        if (seen_dot) {
            if (++frac_digits > 2)
                throw ParseError("money has sub-cent precision: '" + std::string(text) + "'");
        }
        digits.push_back(c);
        any_digit = true;
    }
    if (!any_digit) throw ParseError("bad money value: '" + std::string(text) + "'");
    while (frac_digits < 2) {
        digits.push_back('0');
        ++frac_digits;
    }
    const std::int64_t cents = std::strtoll(digits.c_str(), nullptr, 10);
    return Money{negative ? -cents : cents};
}

inline std::string format_money(Money m) {
    std::int64_t c = m.cents;
    std::string sign;
    if (c < 0) {
        sign = "-";
        c = -c;
    }
    const std::int64_t whole = c / 100;
    const std::int64_t frac = c % 100;
    std::string out = sign + std::to_string(whole) + ".";
    if (frac < 10) out += "0";
    out += std::to_string(frac);
    return out;
}

} // namespace fleetmine
