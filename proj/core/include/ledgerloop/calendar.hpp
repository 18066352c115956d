#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ledgerloop {

/// A UTC calendar day. Thin value wrapper over std::chrono::sys_days.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Strict "YYYY-MM-DD".
    static std::optional<Date> parse(std::string_view iso);

    std::chrono::sys_days sys_days() const { return days_; }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    int year() const;
    unsigned month() const;
    unsigned day() const;
    /// 0 = Sunday ... 6 = Saturday.
    unsigned weekday() const;
    std::string_view weekday_name() const;
    std::int64_t serial() const { return days_.time_since_epoch().count(); }

    unsigned days_in_month() const;
    bool is_month_end() const { return day() == days_in_month(); }
    Date month_end() const;

    Date plus_days(std::int64_t n) const { return Date{days_ + std::chrono::days{n}}; }
    /// Same day-of-month `months` later, clamped to the target month's last day.
    Date plus_months(int months, unsigned day_of_month) const;
    Date plus_months(int months) const { return plus_months(months, day()); }

    std::string iso() const;

    friend std::int64_t operator-(Date a, Date b) { return (a.days_ - b.days_).count(); }
    friend auto operator<=>(Date, Date) = default;

private:
    std::chrono::sys_days days_{};
};

/// Clamp a day-of-month to the length of (year, month).
unsigned clamp_day(int year, unsigned month, unsigned day);
Date make_clamped(int year, unsigned month, unsigned day);

/// Minute-resolution UTC timestamp.
struct Timestamp {
    Date date;
    int minute_of_day = 0;  // [0, 1440)

    /// "2024-12-25T14:05:00Z"
    std::string iso() const;
    /// Accepts "YYYY-MM-DDTHH:MM[:SS][Z]" and "YYYY-MM-DD HH:MM[:SS]".
    static std::optional<Timestamp> parse(std::string_view text);
    /// "HH:MM"
    static std::optional<int> parse_clock(std::string_view hhmm);
    std::string clock() const;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// US federal holidays plus Christmas Eve and New Year's Eve for the year of `date`.
/// Returns the display name ("Christmas", "Thanksgiving", ...).
std::optional<std::string_view> holiday_name(Date date);

}  // namespace ledgerloop
