#include "ledgerloop/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

namespace ledgerloop {

std::string_view to_string(TaskKind kind) { return kind == TaskKind::illiquidity ? "illiquidity" : "theft"; }

std::optional<TaskKind> parse_task_kind(std::string_view text) {
    if (text == "illiquidity") return TaskKind::illiquidity;
    if (text == "theft" || text == "identity_theft") return TaskKind::identity_theft;
    return std::nullopt;
}

nlohmann::ordered_json to_json(const TaskExample& x) {
    nlohmann::ordered_json j;
    j["example_id"] = x.example_id;
    j["task"] = to_string(x.task);
    j["user_id"] = x.user_id;
    j["split"] = x.split;
    j["n_months"] = x.n_months;
    j["window_start"] = x.window_start.iso();
    j["window_end"] = x.window_end.iso();
    if (x.label) j["label"] = *x.label ? 1 : 0;
    if (x.task == TaskKind::identity_theft) j["event_labels"] = x.event_labels;
    if (x.donor_user_id) j["donor_user_id"] = *x.donor_user_id;
    if (x.donor_day) j["donor_day"] = x.donor_day->iso();
    if (x.target_day) j["target_day"] = x.target_day->iso();
    auto events = nlohmann::ordered_json::array();
    for (const auto& e : x.events) {
        auto line = export_json(x.user_id, e);
        line.erase("user_id");
        events.push_back(std::move(line));
    }
    j["events"] = std::move(events);
    return j;
}

TaskExample task_example_from_json(const nlohmann::json& j) {
    auto date = [&](const char* key) {
        auto d = Date::parse(j.at(key).get<std::string>());
        if (!d) throw std::invalid_argument(fmt::format("task example: bad {}", key));
        return *d;
    };
    TaskExample x;
    x.example_id = j.at("example_id").get<std::string>();
    auto kind = parse_task_kind(j.at("task").get<std::string>());
    if (!kind) throw std::invalid_argument("task example: unknown task");
    x.task = *kind;
    x.user_id = j.at("user_id").get<std::string>();
    x.split = j.value("split", "");
    x.n_months = j.at("n_months").get<int>();
    x.window_start = date("window_start");
    x.window_end = date("window_end");
    if (j.contains("label")) x.label = j["label"].get<int>() != 0;
    if (j.contains("event_labels")) x.event_labels = j["event_labels"].get<std::vector<int>>();
    if (j.contains("donor_user_id")) x.donor_user_id = j["donor_user_id"].get<std::string>();
    if (j.contains("donor_day")) x.donor_day = date("donor_day");
    if (j.contains("target_day")) x.target_day = date("target_day");
    for (const auto& e : j.at("events")) x.events.push_back(event_from_json(e));
    return x;
}

std::vector<TaskExample> read_task(const std::filesystem::path& file) {
    std::vector<TaskExample> out;
    for_each_line(file, [&](const std::string& line, std::size_t n) {
        try {
            out.push_back(task_example_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw RunFormatError(fmt::format("{}:{}: {}", file.string(), n, e.what()));
        }
    });
    return out;
}

void write_task(const std::filesystem::path& file, const std::vector<TaskExample>& examples) {
    std::string text;
    for (const auto& x : examples) text += to_json(x).dump() + "\n";
    write_file_atomic(file, text);
}

std::pair<Date, Date> window_bounds(Date trace_start, int n_months, int stride_months, int k) {
    const unsigned dom = trace_start.day();
    return {trace_start.plus_months(k * stride_months, dom), trace_start.plus_months(k * stride_months + n_months, dom)};
}

std::vector<TransactionEvent> events_in(const std::vector<TransactionEvent>& events, Date start, Date end) {
    std::vector<TransactionEvent> out;
    for (const auto& e : events)
        if (e.timestamp.date >= start && e.timestamp.date < end) out.push_back(e);
    return out;
}

Date trace_end(const UserRun& user) { return user.start_date.plus_days(std::max(user.days, 1) - 1); }

bool illiquidity_label(std::optional<Date> illiquid_date, Date window_last_day, std::optional<int> horizon_days) {
    if (!illiquid_date) return false;
    const auto gap = *illiquid_date - window_last_day;
    if (gap <= 0) return false;
    return !horizon_days || gap <= *horizon_days;
}

std::pair<std::size_t, std::size_t> label_counts(const TaskExample& x) {
    if (x.task == TaskKind::illiquidity) return {x.label.value_or(false) ? 1 : 0, 1};
    std::size_t pos = 0;
    for (int b : x.event_labels) pos += b != 0 ? 1 : 0;
    return {pos, x.event_labels.size()};
}

namespace {

void tally(BuildReport* report, const TaskExample& x) {
    if (report == nullptr) return;
    auto [pos, total] = label_counts(x);
    ++report->examples;
    report->positives += pos;
    report->labels += total;
}

}  // namespace

std::vector<TaskExample> build_illiquidity_examples(const RunData& run, const IlliquidityOptions& o, BuildReport* report) {
    if (o.n_months < 1 || o.stride_months < 1) throw std::invalid_argument("n_months and stride must be positive");
    std::vector<TaskExample> out;
    for (const auto& user : run.users) {
        if (user.incomplete) {
            if (report != nullptr) ++report->users_incomplete;
            continue;
        }
        const Date last = trace_end(user);
        std::size_t made = 0;
        for (int k = 0;; ++k) {
            auto [start, end] = window_bounds(user.start_date, o.n_months, o.stride_months, k);
            const Date window_last = end.plus_days(-1);
            // Windows must end before the termination day, or within the trace.
            if (user.illiquid_date ? window_last >= *user.illiquid_date : window_last > last) break;
            TaskExample x;
            x.example_id = fmt::format("{}-illiquidity-n{}-w{:03}", user.user_id, o.n_months, k);
            x.task = TaskKind::illiquidity;
            x.user_id = user.user_id;
            x.n_months = o.n_months;
            x.window_start = start;
            x.window_end = end;
            x.events = events_in(user.events, start, end);
            x.label = illiquidity_label(user.illiquid_date, window_last, o.horizon_days);
            tally(report, x);
            out.push_back(std::move(x));
            ++made;
        }
        if (report != nullptr) ++(made == 0 ? report->users_too_short : report->users_used);
    }
    return out;
}

TaskExample inject_identity_theft(const std::string& primary_id, const std::vector<TransactionEvent>& primary_events,
                                  const UserRun& donor, Date start, Date end, int n_months, Rng& rng) {
    if (donor.user_id == primary_id) throw InjectionInfeasible("donor and primary are the same user");
    if (end <= start) throw InjectionInfeasible("empty window");
    std::set<Date> days;
    for (const auto& e : donor.events)
        if (e.timestamp.date >= start && e.timestamp.date < end && is_exportable(e.kind)) days.insert(e.timestamp.date);
    if (days.empty()) throw InjectionInfeasible(fmt::format("donor {} has no activity in the window", donor.user_id));

    const Date target = start.plus_days(rng.uniform_int(0, (end - start) - 1));
    auto it = days.begin();
    std::advance(it, rng.uniform_int(0, static_cast<std::int64_t>(days.size()) - 1));
    const Date donor_day = *it;

    std::vector<TransactionEvent> injected;
    for (const auto& e : donor.events) {
        if (e.timestamp.date != donor_day || !is_exportable(e.kind)) continue;
        TransactionEvent moved = e;
        moved.timestamp.date = target;
        injected.push_back(std::move(moved));
    }
    std::stable_sort(injected.begin(), injected.end(),
                     [](const TransactionEvent& a, const TransactionEvent& b) { return a.timestamp < b.timestamp; });

    TaskExample x;
    x.example_id = fmt::format("{}-theft-n{}-{}", primary_id, n_months, start.iso());
    x.task = TaskKind::identity_theft;
    x.user_id = primary_id;
    x.n_months = n_months;
    x.window_start = start;
    x.window_end = end;
    x.donor_user_id = donor.user_id;
    x.donor_day = donor_day;
    x.target_day = target;
    // Two-way merge; on equal timestamps the primary event comes first.
    std::size_t i = 0, j = 0;
    while (i < primary_events.size() || j < injected.size()) {
        const bool take_donor =
            i == primary_events.size() || (j < injected.size() && injected[j].timestamp < primary_events[i].timestamp);
        if (take_donor) {
            x.events.push_back(injected[j++]);
            x.event_labels.push_back(1);
        } else {
            x.events.push_back(primary_events[i++]);
            x.event_labels.push_back(0);
        }
    }
    return x;
}

std::vector<TaskExample> build_theft_examples(const RunData& run, const TheftOptions& o, BuildReport* report) {
    if (o.n_months < 1 || o.stride_months < 1) throw std::invalid_argument("n_months and stride must be positive");
    std::vector<const UserRun*> users;
    for (const auto& u : run.users) {
        if (u.incomplete) {
            if (report != nullptr) ++report->users_incomplete;
            continue;
        }
        users.push_back(&u);
    }
    std::vector<TaskExample> out;
    for (std::size_t p = 0; p < users.size(); ++p) {
        const auto& primary = *users[p];
        const Date last = trace_end(primary);
        std::size_t made = 0;
        for (int k = 0;; ++k) {
            auto [start, end] = window_bounds(primary.start_date, o.n_months, o.stride_months, k);
            if (end.plus_days(-1) > last) break;
            Rng rng = Rng::derive(o.seed, "theft:" + primary.user_id, static_cast<std::uint64_t>(k));
            std::vector<const UserRun*> donors;
            for (std::size_t d = 0; d < users.size(); ++d)
                if (d != p) donors.push_back(users[d]);
            rng.shuffle(std::span<const UserRun*>(donors));
            const auto window = events_in(primary.events, start, end);
            bool done = false;
            for (const auto* donor : donors) {
                try {
                    TaskExample x = inject_identity_theft(primary.user_id, window, *donor, start, end, o.n_months, rng);
                    x.example_id = fmt::format("{}-theft-n{}-w{:03}", primary.user_id, o.n_months, k);
                    tally(report, x);
                    out.push_back(std::move(x));
                    done = true;
                    break;
                } catch (const InjectionInfeasible&) {
                }
            }
            if (!done && report != nullptr) ++report->infeasible_injections;
            made += done ? 1 : 0;
        }
        if (report != nullptr) ++(made == 0 ? report->users_too_short : report->users_used);
    }
    return out;
}

std::vector<TransactionEvent> strip_injected(const TaskExample& x) {
    std::vector<TransactionEvent> out;
    for (std::size_t i = 0; i < x.events.size(); ++i)
        if (i >= x.event_labels.size() || x.event_labels[i] == 0) out.push_back(x.events[i]);
    return out;
}

std::vector<SplitPart> split_by_user(std::vector<TaskExample> examples,
                                     const std::vector<std::pair<std::string, double>>& ratios, std::uint64_t seed) {
    if (ratios.empty()) throw SplitError("no split ratios");
    double sum = 0.0;
    for (const auto& [name, r] : ratios) {
        if (r < 0.0) throw SplitError(fmt::format("negative ratio for {}", name));
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw SplitError(fmt::format("ratios sum to {}, not 1", sum));

    std::set<std::string> distinct;
    for (const auto& x : examples) distinct.insert(x.user_id);
    std::vector<std::string> users(distinct.begin(), distinct.end());
    Rng rng = Rng::derive(seed, "split");
    rng.shuffle(std::span<std::string>(users));

    std::vector<SplitPart> parts;
    std::map<std::string, std::size_t> part_of;
    double cumulative = 0.0;
    std::size_t begin = 0;
    for (std::size_t p = 0; p < ratios.size(); ++p) {
        cumulative += ratios[p].second;
        const std::size_t stop = p + 1 == ratios.size()
                                     ? users.size()
                                     : std::min(users.size(), static_cast<std::size_t>(std::llround(cumulative * static_cast<double>(users.size()))));
        SplitPart part;
        part.name = ratios[p].first;
        for (std::size_t i = begin; i < std::max(begin, stop); ++i) {
            part.users.push_back(users[i]);
            part_of[users[i]] = p;
        }
        if (ratios[p].second > 0.0 && part.users.empty())
            throw SplitError(fmt::format("{} users are too few for the requested ratios", users.size()));
        begin = std::max(begin, stop);
        parts.push_back(std::move(part));
    }
    for (auto& x : examples) {
        auto& part = parts[part_of.at(x.user_id)];
        x.split = part.name;
        auto [pos, total] = label_counts(x);
        part.positives += pos;
        part.labels += total;
        part.examples.push_back(std::move(x));
    }
    return parts;
}

}  // namespace ledgerloop
