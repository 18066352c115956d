#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ledgerloop/corpus_io.hpp"

namespace ledgerloop {

enum class GroupKey { education_level, car_ownership, age_bucket, spending_pattern, month, weekday, holiday };
std::string_view to_string(GroupKey key);
std::optional<GroupKey> parse_group_key(std::string_view text);
const std::vector<GroupKey>& all_group_keys();

/// "18-29", "30-39", ..., "70+" ("under 18" below).
std::string age_bucket(int age);

/// Counts as spending: positive purchases, subscriptions and bills (not interest or fees).
bool is_spending(const TransactionEvent& event);

struct GroupRow {
    std::string key;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population

    friend bool operator==(const GroupRow&, const GroupRow&) = default;
};

/// Observations are user-month spending totals for persona keys and `month`,
/// and user-day totals for `weekday` and `holiday`. Every simulated month or
/// day is an observation, including those with no spending.
std::vector<GroupRow> group_stats(const RunData& run, GroupKey key);

/// Two-pass population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Linear interpolation between closest ranks, on sorted input.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct Distribution {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

Distribution describe(std::vector<double> values);

/// One point per end-of-day snapshot: balance / limit.
std::vector<std::pair<Date, double>> credit_utilization_series(const UserRun& user);
double utilization_variance(const UserRun& user);

struct KindShare {
    std::string name;
    std::size_t count = 0;
    double percent = 0.0;
    double reference_percent = 0.0;
};

struct Summary {
    std::size_t events = 0;
    std::vector<KindShare> kinds;  // daily transactions, payments, recurring subscriptions
    std::size_t merchants = 0;
    std::size_t merchants_frequent = 0;
    std::size_t frequency_threshold = 0;
    std::size_t users_normal = 0;
    std::size_t users_illiquid = 0;
    std::size_t users_incomplete = 0;
    Distribution timespan_days;
    Distribution transactions_per_user;
    Distribution transactions_per_month;
    Distribution transaction_amounts;
    Distribution transaction_amounts_per_month;
    Distribution payment_amounts;
};

/// Payments are every negative-amount event; recurring subscriptions are
/// subscription and bill charges; everything else is a daily transaction.
Summary summarize(const RunData& run, std::size_t frequency_threshold = 50);

std::string format_summary(const Summary& summary);
void write_group_csv(std::ostream& out, GroupKey key, const std::vector<GroupRow>& rows);
/// user_id,termination,points,mean,variance
void write_utilization_csv(std::ostream& out, const RunData& run);

}  // namespace ledgerloop
