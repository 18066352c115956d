#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/corpus_io.hpp"
#include "ledgerloop/ledger.hpp"
#include "ledgerloop/rng.hpp"

namespace ledgerloop {

enum class TaskKind { illiquidity, identity_theft };
std::string_view to_string(TaskKind kind);  // "illiquidity" / "theft"
std::optional<TaskKind> parse_task_kind(std::string_view text);

struct TaskExample {
    std::string example_id;
    TaskKind task = TaskKind::illiquidity;
    std::string user_id;
    int n_months = 0;
    Date window_start;  // inclusive
    Date window_end;    // exclusive
    std::vector<TransactionEvent> events;
    std::optional<bool> label;  // illiquidity
    std::vector<int> event_labels;  // identity theft: 1 on injected events
    std::optional<std::string> donor_user_id;
    std::optional<Date> donor_day;
    std::optional<Date> target_day;
    std::string split;

    friend bool operator==(const TaskExample&, const TaskExample&) = default;
};

nlohmann::ordered_json to_json(const TaskExample& example);
TaskExample task_example_from_json(const nlohmann::json& j);
std::vector<TaskExample> read_task(const std::filesystem::path& file);
void write_task(const std::filesystem::path& file, const std::vector<TaskExample>& examples);

/// [start, end) of the k-th window: n calendar months starting k * stride months after `trace_start`.
std::pair<Date, Date> window_bounds(Date trace_start, int n_months, int stride_months, int k);

/// Exported events of `events` dated in [start, end), in their original order.
std::vector<TransactionEvent> events_in(const std::vector<TransactionEvent>& events, Date start, Date end);

/// Last simulated day of a user.
Date trace_end(const UserRun& user);

struct IlliquidityOptions {
    int n_months = 3;
    std::optional<int> horizon_days;  // nullopt: any time after the window
    int stride_months = 1;
};

/// The label rule on its own: illiquid within horizon_days after the window's last day.
bool illiquidity_label(std::optional<Date> illiquid_date, Date window_last_day, std::optional<int> horizon_days);

struct BuildReport {
    std::size_t examples = 0;
    std::size_t users_used = 0;
    std::size_t users_too_short = 0;
    std::size_t users_incomplete = 0;
    std::size_t infeasible_injections = 0;
    std::size_t positives = 0;  // examples (illiquidity) or events (theft)
    std::size_t labels = 0;
};

std::vector<TaskExample> build_illiquidity_examples(const RunData& run, const IlliquidityOptions& options,
                                                    BuildReport* report = nullptr);

class InjectionInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Splices one day of the donor's activity into the primary window [start, end).
/// `primary_events` must already be the primary's window events.
TaskExample inject_identity_theft(const std::string& primary_id, const std::vector<TransactionEvent>& primary_events,
                                  const UserRun& donor, Date start, Date end, int n_months, Rng& rng);

struct TheftOptions {
    int n_months = 3;
    int stride_months = 1;
    std::uint64_t seed = 42;
};

/// One injected example per primary window, donors drawn uniformly from the other users.
std::vector<TaskExample> build_theft_examples(const RunData& run, const TheftOptions& options,
                                              BuildReport* report = nullptr);

/// Removes the labeled (injected) events, recovering the primary window.
std::vector<TransactionEvent> strip_injected(const TaskExample& example);

struct SplitPart {
    std::string name;
    std::vector<std::string> users;
    std::vector<TaskExample> examples;
    std::size_t positives = 0;
    std::size_t labels = 0;
    double positive_rate() const { return labels == 0 ? 0.0 : static_cast<double>(positives) / static_cast<double>(labels); }
};

class SplitError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Assigns whole users to parts. Ratios must sum to 1; each part with a
/// positive ratio needs at least one user.
std::vector<SplitPart> split_by_user(std::vector<TaskExample> examples,
                                     const std::vector<std::pair<std::string, double>>& ratios, std::uint64_t seed);

/// Positive count and label count of one example (example-level or per event).
std::pair<std::size_t, std::size_t> label_counts(const TaskExample& example);

}  // namespace ledgerloop
