#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ledgerloop {

/// Exact amount of US currency held as signed integer cents.
class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_cents(std::int64_t cents) { return Money{cents}; }
    static constexpr Money from_dollars(std::int64_t dollars) { return Money{dollars * 100}; }

    /// Parses a decimal string such as "12.34", "-5", "+0.5" or "1,234.00".
    /// Digits past the second decimal place round the magnitude half-up.
    static std::optional<Money> parse(std::string_view text);

    /// Converts a dollar value (e.g. from a JSON number) to cents, rounding half-up.
    static Money from_dollars_rounded(double dollars);

    constexpr std::int64_t cents() const { return cents_; }
    double dollars() const { return static_cast<double>(cents_) / 100.0; }

    /// Fixed two-decimal representation without grouping: "-1234.50".
    std::string str() const;

    constexpr Money abs() const { return Money{cents_ < 0 ? -cents_ : cents_}; }
    constexpr bool is_zero() const { return cents_ == 0; }
    constexpr bool is_positive() const { return cents_ > 0; }
    constexpr bool is_negative() const { return cents_ < 0; }

    constexpr Money operator-() const { return Money{-cents_}; }
    constexpr Money& operator+=(Money other) { cents_ += other.cents_; return *this; }
    constexpr Money& operator-=(Money other) { cents_ -= other.cents_; return *this; }
    friend constexpr Money operator+(Money a, Money b) { return Money{a.cents_ + b.cents_}; }
    friend constexpr Money operator-(Money a, Money b) { return Money{a.cents_ - b.cents_}; }
    friend constexpr auto operator<=>(Money, Money) = default;

private:
    constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
    std::int64_t cents_ = 0;
};

constexpr Money min(Money a, Money b) { return a < b ? a : b; }
constexpr Money max(Money a, Money b) { return a < b ? b : a; }

/// Rounds half-up (toward +infinity at exactly .5) to the nearest integer.
std::int64_t round_half_up(double value);

/// "$1,234.56" / "-$12.00" for prompts and reports.
std::string format_usd(Money amount);

}  // namespace ledgerloop
