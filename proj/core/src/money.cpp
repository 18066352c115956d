#include "ledgerloop/money.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace ledgerloop {

std::int64_t round_half_up(double value) { return static_cast<std::int64_t>(std::floor(value + 0.5)); }

std::optional<Money> Money::parse(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;

    bool negative = false;
    if (text.front() == '-' || text.front() == '+') {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (!text.empty() && text.front() == '$') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;

    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool round_up = false;
    bool seen_digit = false;
    bool seen_point = false;
    constexpr std::int64_t limit = std::numeric_limits<std::int64_t>::max() / 1000;

    for (char c : text) {
        if (c == ',' && !seen_point) continue;
        if (c == '.') {
            if (seen_point) return std::nullopt;
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') return std::nullopt;
        seen_digit = true;
        int d = c - '0';
        if (!seen_point) {
            if (whole > limit) return std::nullopt;
            whole = whole * 10 + d;
        } else if (frac_digits < 2) {
            frac = frac * 10 + d;
            ++frac_digits;
        } else if (frac_digits == 2) {
            round_up = d >= 5;
            ++frac_digits;
        }
    }
    if (!seen_digit) return std::nullopt;
    while (frac_digits < 2) {
        frac *= 10;
        ++frac_digits;
    }
    std::int64_t cents = whole * 100 + frac + (round_up ? 1 : 0);
    if (negative) cents = -cents;
    return Money::from_cents(cents);
}

Money Money::from_dollars_rounded(double dollars) {
    // Go through the shortest decimal representation so 15.49 maps to 1549, not 1548.
    auto parsed = Money::parse(fmt::format("{}", dollars));
    if (parsed) return *parsed;
    return Money::from_cents(round_half_up(dollars * 100.0));
}

std::string Money::str() const {
    std::int64_t magnitude = cents_ < 0 ? -cents_ : cents_;
    return fmt::format("{}{}.{:02}", cents_ < 0 ? "-" : "", magnitude / 100, magnitude % 100);
}

std::string format_usd(Money amount) {
    std::int64_t magnitude = amount.abs().cents();
    std::string whole = std::to_string(magnitude / 100);
    std::string grouped;
    int count = 0;
    for (auto it = whole.rbegin(); it != whole.rend(); ++it) {
        if (count > 0 && count % 3 == 0) grouped.insert(grouped.begin(), ',');
        grouped.insert(grouped.begin(), *it);
        ++count;
    }
    return fmt::format("{}${}.{:02}", amount.is_negative() ? "-" : "", grouped, magnitude % 100);
}

}  // namespace ledgerloop
