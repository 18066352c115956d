#include "ledgerloop/calendar.hpp"

#include <array>
#include <charconv>

#include <fmt/format.h>

namespace ledgerloop {

using namespace std::chrono;

namespace {

bool parse_uint(std::string_view text, unsigned& out) {
    if (text.empty()) return false;
    for (char c : text)
        if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

Date nth_weekday(int y, unsigned m, unsigned wd, unsigned n) {
    return Date{sys_days{year{y} / month{m} / weekday{wd}[n]}};
}

Date last_weekday(int y, unsigned m, unsigned wd) {
    return Date{sys_days{year{y} / month{m} / weekday{wd}[last]}};
}

}  // namespace

Date Date::from_ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}}};
}

std::optional<Date> Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(iso.substr(0, 4), y) || !parse_uint(iso.substr(5, 2), m) || !parse_uint(iso.substr(8, 2), d))
        return std::nullopt;
    year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{ymd}};
}

int Date::year() const { return static_cast<int>(ymd().year()); }
unsigned Date::month() const { return static_cast<unsigned>(ymd().month()); }
unsigned Date::day() const { return static_cast<unsigned>(ymd().day()); }
unsigned Date::weekday() const { return std::chrono::weekday{days_}.c_encoding(); }

std::string_view Date::weekday_name() const {
    static constexpr std::array<std::string_view, 7> names{"Sunday",   "Monday", "Tuesday", "Wednesday",
                                                           "Thursday", "Friday", "Saturday"};
    return names[weekday()];
}

unsigned clamp_day(int y, unsigned m, unsigned d) {
    auto last_day = static_cast<unsigned>(year_month_day_last{year{y}, month_day_last{month{m}}}.day());
    if (d < 1) return 1;
    return d > last_day ? last_day : d;
}

Date make_clamped(int y, unsigned m, unsigned d) { return Date::from_ymd(y, m, clamp_day(y, m, d)); }

unsigned Date::days_in_month() const { return clamp_day(year(), month(), 31); }

Date Date::month_end() const { return Date::from_ymd(year(), month(), days_in_month()); }

Date Date::plus_months(int months, unsigned day_of_month) const {
    int index = year() * 12 + static_cast<int>(month()) - 1 + months;
    int y = index >= 0 ? index / 12 : (index - 11) / 12;
    unsigned m = static_cast<unsigned>(index - y * 12) + 1;
    return make_clamped(y, m, day_of_month);
}

std::string Date::iso() const { return fmt::format("{:04}-{:02}-{:02}", year(), month(), day()); }

std::string Timestamp::iso() const {
    return fmt::format("{}T{:02}:{:02}:00Z", date.iso(), minute_of_day / 60, minute_of_day % 60);
}

std::string Timestamp::clock() const { return fmt::format("{:02}:{:02}", minute_of_day / 60, minute_of_day % 60); }

std::optional<int> Timestamp::parse_clock(std::string_view hhmm) {
    if (hhmm.size() < 5 || hhmm[2] != ':') return std::nullopt;
    unsigned h = 0, m = 0;
    if (!parse_uint(hhmm.substr(0, 2), h) || !parse_uint(hhmm.substr(3, 2), m)) return std::nullopt;
    if (h > 23 || m > 59) return std::nullopt;
    if (hhmm.size() > 5) {
        auto rest = hhmm.substr(5);
        unsigned s = 0;
        if (rest.size() != 3 || rest[0] != ':' || !parse_uint(rest.substr(1), s) || s > 59) return std::nullopt;
    }
    return static_cast<int>(h * 60 + m);
}

std::optional<Timestamp> Timestamp::parse(std::string_view text) {
    if (text.size() < 16) return std::nullopt;
    auto date = Date::parse(text.substr(0, 10));
    if (!date || (text[10] != 'T' && text[10] != ' ')) return std::nullopt;
    auto rest = text.substr(11);
    if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
    auto clock = parse_clock(rest);
    if (!clock) return std::nullopt;
    return Timestamp{*date, *clock};
}

std::optional<std::string_view> holiday_name(Date date) {
    const int y = date.year();
    const unsigned m = date.month();
    const unsigned d = date.day();
    // Fixed-date observances.
    if (m == 1 && d == 1) return "New Year's Day";
    if (m == 6 && d == 19) return "Juneteenth";
    if (m == 7 && d == 4) return "Independence Day";
    if (m == 11 && d == 11) return "Veterans Day";
    if (m == 12 && d == 24) return "Christmas Eve";
    if (m == 12 && d == 25) return "Christmas";
    if (m == 12 && d == 31) return "New Year's Eve";
    // Floating Monday/Thursday holidays.
    if (date == nth_weekday(y, 1, 1, 3)) return "Martin Luther King Jr. Day";
    if (date == nth_weekday(y, 2, 1, 3)) return "Presidents' Day";
    if (date == last_weekday(y, 5, 1)) return "Memorial Day";
    if (date == nth_weekday(y, 9, 1, 1)) return "Labor Day";
    if (date == nth_weekday(y, 10, 1, 2)) return "Columbus Day";
    if (date == nth_weekday(y, 11, 4, 4)) return "Thanksgiving";
    return std::nullopt;
}

}  // namespace ledgerloop
