#include "ledgerloop/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "ledgerloop/tasks.hpp"

namespace ledgerloop {

namespace {

constexpr std::array<std::string_view, 7> kKeyNames{"education_level", "car_ownership", "age_bucket", "spending_pattern",
                                                    "month",           "weekday",       "holiday"};
constexpr std::array<std::string_view, 12> kMonths{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

double dollars(std::int64_t cents) { return static_cast<double>(cents) / 100.0; }

struct Keyed {
    int rank = 0;
    std::string label;
    auto operator<=>(const Keyed&) const = default;
};

Keyed persona_key(const AugmentedPersona* p, GroupKey key) {
    if (p == nullptr) return {1000, "unknown"};
    switch (key) {
        case GroupKey::education_level: return {0, p->user_persona.education_level};
        case GroupKey::car_ownership: return {0, p->user_financial_profile.car_ownership};
        case GroupKey::age_bucket: {
            const int age = p->user_persona.age;
            return {age < 18 ? 0 : std::min(age, 70) / 10, age_bucket(age)};
        }
        case GroupKey::spending_pattern: {
            auto a = p->user_financial_profile.archetype();
            if (!a) return {1000, "unknown"};
            return {static_cast<int>(*a), std::string(to_string(*a))};
        }
        default: return {1000, "unknown"};
    }
}

std::int64_t month_index(Date d) { return static_cast<std::int64_t>(d.year()) * 12 + d.month() - 1; }

}  // namespace

std::string_view to_string(GroupKey key) { return kKeyNames[static_cast<std::size_t>(key)]; }

std::optional<GroupKey> parse_group_key(std::string_view text) {
    for (std::size_t i = 0; i < kKeyNames.size(); ++i)
        if (kKeyNames[i] == text) return static_cast<GroupKey>(i);
    return std::nullopt;
}

const std::vector<GroupKey>& all_group_keys() {
    static const std::vector<GroupKey> keys = {GroupKey::education_level, GroupKey::car_ownership, GroupKey::age_bucket,
                                               GroupKey::spending_pattern, GroupKey::month,        GroupKey::weekday,
                                               GroupKey::holiday};
    return keys;
}

std::string age_bucket(int age) {
    if (age < 18) return "under 18";
    if (age < 30) return "18-29";
    if (age >= 70) return "70+";
    const int lo = age / 10 * 10;
    return fmt::format("{}-{}", lo, lo + 9);
}

bool is_spending(const TransactionEvent& e) {
    if (!e.amount.is_positive()) return false;
    return e.kind == EventKind::purchase || e.kind == EventKind::subscription_charge || e.kind == EventKind::recurring_bill;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Distribution describe(std::vector<double> values) {
    Distribution d;
    d.count = values.size();
    if (values.empty()) return d;
    std::tie(d.mean, d.stddev) = mean_std(values);
    std::sort(values.begin(), values.end());
    d.min = values.front();
    d.max = values.back();
    d.q25 = quantile_sorted(values, 0.25);
    d.q50 = quantile_sorted(values, 0.50);
    d.q75 = quantile_sorted(values, 0.75);
    return d;
}

std::vector<GroupRow> group_stats(const RunData& run, GroupKey key) {
    std::map<Keyed, std::vector<double>> groups;
    for (const auto& user : run.users) {
        if (user.days <= 0) continue;
        const Date first = user.start_date;
        const Date last = trace_end(user);
        if (key == GroupKey::weekday || key == GroupKey::holiday) {
            std::map<Date, std::int64_t> daily;
            for (Date d = first; d <= last; d = d.plus_days(1)) daily[d] = 0;
            for (const auto& e : user.events)
                if (is_spending(e) && daily.count(e.timestamp.date) != 0) daily[e.timestamp.date] += e.amount.cents();
            for (const auto& [d, cents] : daily) {
                Keyed k = key == GroupKey::weekday
                              ? Keyed{static_cast<int>(d.weekday()), std::string(d.weekday_name())}
                              : (holiday_name(d) ? Keyed{0, "holiday"} : Keyed{1, "regular day"});
                groups[k].push_back(dollars(cents));
            }
            continue;
        }
        std::map<std::int64_t, std::int64_t> monthly;
        for (auto m = month_index(first); m <= month_index(last); ++m) monthly[m] = 0;
        for (const auto& e : user.events)
            if (is_spending(e) && monthly.count(month_index(e.timestamp.date)) != 0)
                monthly[month_index(e.timestamp.date)] += e.amount.cents();
        const Keyed fixed = key == GroupKey::month ? Keyed{} : persona_key(run.persona(user.user_id), key);
        for (const auto& [m, cents] : monthly) {
            if (key == GroupKey::month) {
                const auto mo = static_cast<std::size_t>(m % 12);
                groups[Keyed{static_cast<int>(mo), std::string(kMonths[mo])}].push_back(dollars(cents));
            } else {
                groups[fixed].push_back(dollars(cents));
            }
        }
    }
    std::vector<GroupRow> rows;
    for (const auto& [k, values] : groups) {
        auto [mean, sd] = mean_std(values);
        rows.push_back({k.label, values.size(), mean, sd});
    }
    return rows;
}

std::vector<std::pair<Date, double>> credit_utilization_series(const UserRun& user) {
    std::vector<std::pair<Date, double>> out;
    out.reserve(user.snapshots.size());
    for (const auto& s : user.snapshots) {
        const double u = s.credit_limit.is_positive()
                             ? static_cast<double>(s.credit_balance.cents()) / static_cast<double>(s.credit_limit.cents())
                             : 0.0;
        out.emplace_back(s.date, u);
    }
    return out;
}

double utilization_variance(const UserRun& user) {
    std::vector<double> values;
    for (const auto& [_, u] : credit_utilization_series(user)) values.push_back(u);
    const double sd = mean_std(values).second;
    return sd * sd;
}

Summary summarize(const RunData& run, std::size_t frequency_threshold) {
    Summary s;
    s.frequency_threshold = frequency_threshold;
    std::size_t daily = 0, payments = 0, recurring = 0;
    std::map<std::string, std::size_t> merchant_counts;
    std::vector<double> timespan, per_user, per_month, amounts, amounts_per_month, payment_amounts;
    for (const auto& user : run.users) {
        if (user.incomplete) ++s.users_incomplete;
        if (user.termination == Termination::illiquid)
            ++s.users_illiquid;
        else
            ++s.users_normal;
        timespan.push_back(static_cast<double>(user.days));
        per_user.push_back(static_cast<double>(user.events.size()));
        std::map<std::int64_t, std::pair<std::size_t, std::int64_t>> months;
        for (const auto& e : user.events) {
            ++merchant_counts[e.merchant_name];
            auto& m = months[month_index(e.timestamp.date)];
            ++m.first;
            if (e.amount.is_negative()) {
                ++payments;
                payment_amounts.push_back(dollars(-e.amount.cents()));
            } else {
                if (e.kind == EventKind::subscription_charge || e.kind == EventKind::recurring_bill)
                    ++recurring;
                else
                    ++daily;
                amounts.push_back(dollars(e.amount.cents()));
                m.second += e.amount.cents();
            }
        }
        for (const auto& [_, m] : months) {
            per_month.push_back(static_cast<double>(m.first));
            amounts_per_month.push_back(dollars(m.second));
        }
    }
    s.events = daily + payments + recurring;
    auto share = [&](std::string name, std::size_t n, double reference) {
        const double pct = s.events == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(s.events);
        s.kinds.push_back({std::move(name), n, pct, reference});
    };
    share("daily transactions", daily, 79.9);
    share("payments", payments, 6.2);
    share("recurring subscriptions", recurring, 13.9);
    s.merchants = merchant_counts.size();
    for (const auto& [_, n] : merchant_counts)
        if (n > frequency_threshold) ++s.merchants_frequent;
    s.timespan_days = describe(std::move(timespan));
    s.transactions_per_user = describe(std::move(per_user));
    s.transactions_per_month = describe(std::move(per_month));
    s.transaction_amounts = describe(std::move(amounts));
    s.transaction_amounts_per_month = describe(std::move(amounts_per_month));
    s.payment_amounts = describe(std::move(payment_amounts));
    return s;
}

std::string format_summary(const Summary& s) {
    std::string out;
    out += fmt::format("events: {}\n", s.events);
    for (const auto& k : s.kinds)
        out += fmt::format("  {:<26}{:>10} ({:5.1f}%)   reference {:.1f}%\n", k.name, k.count, k.percent, k.reference_percent);
    out += fmt::format("merchant names: {} total, {} with frequency > {}\n", s.merchants, s.merchants_frequent,
                       s.frequency_threshold);
    const auto users = s.users_normal + s.users_illiquid;
    const auto pct = [&](std::size_t n) { return users == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(users); };
    out += fmt::format("users: {} normal ({:.1f}%), {} illiquid ({:.1f}%), {} incomplete   reference illiquid 5.7%\n",
                       s.users_normal, pct(s.users_normal), s.users_illiquid, pct(s.users_illiquid), s.users_incomplete);
    out += fmt::format("\n{:<32}{:>8}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}\n", "", "count", "mean", "std", "min",
                       "25%", "50%", "75%", "max");
    auto row = [&](std::string_view name, const Distribution& d) {
        out += fmt::format("{:<32}{:>8}{:>12.2f}{:>12.2f}{:>12.2f}{:>12.2f}{:>12.2f}{:>12.2f}{:>12.2f}\n", name, d.count,
                           d.mean, d.stddev, d.min, d.q25, d.q50, d.q75, d.max);
    };
    row("timespan per user (days)", s.timespan_days);
    row("#transactions per user", s.transactions_per_user);
    row("#transactions per month", s.transactions_per_month);
    row("transaction amounts", s.transaction_amounts);
    row("transaction amounts per month", s.transaction_amounts_per_month);
    row("payment amounts", s.payment_amounts);
    return out;
}

void write_group_csv(std::ostream& out, GroupKey key, const std::vector<GroupRow>& rows) {
    out << to_string(key) << ",count,mean,std\n";
    for (const auto& r : rows) {
        std::string label = r.key;
        if (label.find_first_of(",\"") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : label) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            label = quoted + "\"";
        }
        out << fmt::format("{},{},{:.6f},{:.6f}\n", label, r.count, r.mean, r.stddev);
    }
}

void write_utilization_csv(std::ostream& out, const RunData& run) {
    out << "user_id,termination,points,mean,variance\n";
    for (const auto& user : run.users) {
        std::vector<double> values;
        for (const auto& [_, u] : credit_utilization_series(user)) values.push_back(u);
        auto [mean, sd] = mean_std(values);
        out << fmt::format("{},{},{},{:.6f},{:.6f}\n", user.user_id, to_string(user.termination), values.size(), mean,
                           sd * sd);
    }
}

}  // namespace ledgerloop
