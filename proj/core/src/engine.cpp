#include "ledgerloop/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#ifndef LEDGERLOOP_VERSION
#define LEDGERLOOP_VERSION "0.0.0"
#endif

namespace ledgerloop {

namespace {

// Proposed drafts live between the scheduled postings after midnight and the
// statement events just before it.
constexpr int kFirstPlanMinute = 60;
constexpr int kLastPlanMinute = 23 * 60 + 50;

void normalize(DailyPlan& plan) {
    for (auto& e : plan.events) e.timestamp.minute_of_day = std::clamp(e.timestamp.minute_of_day, kFirstPlanMinute, kLastPlanMinute);
    std::stable_sort(plan.events.begin(), plan.events.end(),
                     [](const TransactionEvent& a, const TransactionEvent& b) { return a.timestamp < b.timestamp; });
}

nlohmann::json violations_json(const std::vector<Violation>& vs) {
    auto arr = nlohmann::json::array();
    for (const auto& v : vs) arr.push_back(nlohmann::json(to_json(v)));
    return arr;
}

nlohmann::json plan_json(const DailyPlan& plan) { return nlohmann::json::parse(serialize_plan(plan)); }

void audit_checks(AuditWriter* audit, const RuleRegistry& registry, const RuleOutcome& outcome, int attempt) {
    if (audit == nullptr) return;
    for (const auto& rule : registry.rules()) {
        std::vector<Violation> mine;
        for (const auto& v : outcome.violations)
            if (v.rule_id == rule->id()) mine.push_back(v);
        const bool hard = std::any_of(mine.begin(), mine.end(), [](const Violation& v) { return v.severity == Severity::hard; });
        audit->record(AuditKind::check, {{"attempt", attempt}, {"violations", violations_json(mine)}},
                      std::string(rule->id()), hard ? Verdict::fail : Verdict::pass);
    }
}

std::vector<Violation> soft_only(const std::vector<Violation>& vs) {
    std::vector<Violation> out;
    for (const auto& v : vs)
        if (v.severity == Severity::soft) out.push_back(v);
    return out;
}

std::string day_summary(Date date, const LedgerState& s, std::size_t accepted) {
    return fmt::format("{}: {} planned transactions accepted, spent {}, paid {}, cash {}, card balance {}", date.iso(),
                       accepted, format_usd(s.day.spending), format_usd(s.day.payment), format_usd(s.cash),
                       format_usd(s.credit_balance));
}

}  // namespace

std::string_view library_version() { return LEDGERLOOP_VERSION; }

std::string_view to_string(Termination t) { return t == Termination::illiquid ? "illiquid" : "horizon_reached"; }

std::optional<Termination> parse_termination(std::string_view text) {
    if (text == "illiquid") return Termination::illiquid;
    if (text == "horizon_reached") return Termination::horizon_reached;
    return std::nullopt;
}

DaySnapshot snapshot_of(const LedgerState& s) {
    return {s.current_date, s.cash, s.credit_balance, s.credit_limit, s.statement_balance_due, s.due_date, state_hash(s)};
}

DayResult simulate_day(LedgerState& state, Date date, const DayContext& ctx, ConversationWindow& window,
                       const std::vector<Violation>& carry) {
    const auto& config = ctx.config;
    const auto& user = ctx.persona.user_id;
    auto* audit = ctx.audit;
    const auto serial = static_cast<std::uint64_t>(date.serial());
    DayResult result;

    if (audit != nullptr) audit->set_day(date);
    commit(state, Control{ControlKind::begin_day, date, {}}, audit);
    Rng schedule_rng = Rng::derive(config.seed, "schedule:" + user, serial);
    result.committed = post_scheduled_items(state, date, schedule_rng, audit);

    RuleOutcome pre;
    pre.violations = carry;
    pre.forced_events = result.committed;
    pre.fragments = ctx.registry.fragments(state, date, pre, config.seed, user);
    result.random_event = std::any_of(pre.fragments.begin(), pre.fragments.end(), [](const PromptFragment& f) {
        return f.kind == PromptFragment::Kind::forced_charge && f.rule_id == "random_events";
    });

    PromptSpec prompt = build_next_prompt(ctx.registry, state, date, pre, window, &ctx.persona);
    const std::string first_prompt = prompt.user;
    Rng propose_rng = Rng::derive(config.seed, "propose:" + user, serial);

    DailyPlan plan;
    RuleOutcome outcome;
    bool have_plan = false;
    for (int attempt = 0; attempt <= config.repair_retries; ++attempt) {
        prompt.attempt = attempt;
        if (audit != nullptr)
            audit->record(AuditKind::prompt, {{"attempt", attempt},
                                              {"hash", hex64(fnv1a64(prompt.system + "\n" + prompt.user))},
                                              {"length", prompt.system.size() + prompt.user.size()},
                                              {"feedback", prompt.feedback.size()}});
        try {
            plan = ctx.proposer.propose(prompt, ctx.persona, state, propose_rng, window);
        } catch (const PlanUnavailable& e) {
            result.plan_unavailable = true;
            result.backend_failure = e.backend_failure();
            if (audit != nullptr)
                audit->record(AuditKind::plan, {{"attempt", attempt}, {"error", e.what()},
                                                {"backend_failure", e.backend_failure()}});
            break;
        }
        normalize(plan);
        have_plan = true;
        if (audit != nullptr) audit->record(AuditKind::plan, {{"attempt", attempt}, {"plan", plan_json(plan)}});

        outcome = ctx.registry.evaluate_plan(state, plan);
        audit_checks(audit, ctx.registry, outcome, attempt);
        if (!outcome.has_hard()) break;

        ++result.rejections;
        if (audit != nullptr)
            audit->record(AuditKind::rejection, {{"attempt", attempt}, {"violations", violations_json(outcome.violations)}});
        if (attempt == config.repair_retries) break;

        RuleOutcome feedback{outcome.violations, result.committed, pre.fragments};
        prompt = build_next_prompt(ctx.registry, state, date, feedback, window, &ctx.persona);
        prompt.previous_plan = plan;
    }

    // Repairs exhausted: drop offending drafts until the remainder is feasible.
    if (have_plan) {
        while (outcome.has_hard()) {
            auto indices = outcome.offending_indices();
            std::vector<std::size_t> removed;
            if (indices.empty()) {
                for (std::size_t i = 0; i < plan.events.size(); ++i) removed.push_back(i);
                plan.events.clear();
            } else {
                for (auto it = indices.rbegin(); it != indices.rend(); ++it) {
                    if (*it >= plan.events.size()) continue;
                    plan.events.erase(plan.events.begin() + static_cast<std::ptrdiff_t>(*it));
                    removed.push_back(*it);
                }
                std::reverse(removed.begin(), removed.end());
            }
            result.dropped += static_cast<int>(removed.size());
            if (audit != nullptr)
                audit->record(AuditKind::dropped, {{"indices", removed}, {"violations", violations_json(outcome.violations)}});
            outcome = ctx.registry.evaluate_plan(state, plan);
            audit_checks(audit, ctx.registry, outcome, -1);
        }
        for (const auto& draft : plan.events) result.committed.push_back(commit(state, draft, audit));
        result.carry = soft_only(outcome.violations);
        result.accepted = plan;
    }

    if (date.is_month_end()) {
        auto posted = close_statement(state, date, config, audit);
        result.committed.insert(result.committed.end(), posted.begin(), posted.end());
    }

    if (state.cash < config.overdraft_allowance) {
        commit(state, Control{ControlKind::terminate, date, {}}, audit);
        result.terminated = true;
        if (audit != nullptr)
            audit->record(AuditKind::termination, {{"reason", "illiquid"}, {"cash", state.cash.str()},
                                                   {"overdraft_allowance", config.overdraft_allowance.str()}});
    }

    const std::size_t accepted = result.accepted ? result.accepted->events.size() : 0;
    window.push(Turn{date, first_prompt, serialize_plan(result.accepted.value_or(DailyPlan{})),
                     day_summary(date, state, accepted)});
    return result;
}

int horizon_days(const EngineConfig& config, std::string_view user_id) {
    if (!config.horizon.enabled) return config.max_days;
    Rng rng = Rng::derive(config.seed, fmt::format("horizon:{}", user_id));
    const auto lo = std::min(config.horizon.min_days, config.horizon.max_days);
    const auto hi = std::max(config.horizon.min_days, config.horizon.max_days);
    return static_cast<int>(std::min<std::int64_t>(rng.uniform_int(lo, hi), config.max_days));
}

UserTrace simulate_user(const AugmentedPersona& persona, const EngineConfig& config, const RuleRegistry& registry,
                        Proposer& proposer, bool keep_audit) {
    UserTrace trace;
    trace.user_id = persona.user_id;
    LedgerState state = init_state(persona.user_financial_profile, config.start_date, config);
    trace.initial = state;

    AuditWriter writer(persona.user_id);
    writer.init(state);
    DayContext ctx{config, registry, proposer, persona, &writer};
    ConversationWindow window(static_cast<std::size_t>(std::max(0, config.history_days)));
    std::vector<Violation> carry;
    int consecutive_failures = 0;

    const int days = horizon_days(config, persona.user_id);
    for (int d = 0; d < days; ++d) {
        const Date date = config.start_date.plus_days(d);
        DayResult day = simulate_day(state, date, ctx, window, carry);
        carry = std::move(day.carry);
        ++trace.days;
        trace.rejections += day.rejections;
        trace.dropped += day.dropped;
        trace.random_events += day.random_event ? 1 : 0;
        trace.plan_unavailable += day.plan_unavailable ? 1 : 0;
        trace.events.insert(trace.events.end(), std::make_move_iterator(day.committed.begin()),
                            std::make_move_iterator(day.committed.end()));
        trace.snapshots.push_back(snapshot_of(state));
        if (!keep_audit && writer.records().size() > 4096) writer.take();

        if (day.terminated) {
            trace.termination = Termination::illiquid;
            trace.illiquid_date = date;
            break;
        }
        consecutive_failures = day.backend_failure ? consecutive_failures + 1 : 0;
        if (consecutive_failures >= config.external.max_consecutive_failures) {
            trace.incomplete = true;
            break;
        }
    }
    trace.final_state = state;
    if (keep_audit) trace.audit = writer.take();
    return trace;
}

void for_each_trace(const std::vector<AugmentedPersona>& personas, const EngineConfig& config,
                    const RuleRegistry& registry, const ProposerFactory& factory, int jobs,
                    const std::function<void(std::size_t, UserTrace&&)>& sink, bool keep_audit) {
    const std::size_t n = personas.size();
    const auto workers = static_cast<std::size_t>(std::clamp<std::int64_t>(jobs, 1, static_cast<std::int64_t>(std::max<std::size_t>(n, 1))));
    if (workers <= 1) {
        auto proposer = factory();
        for (std::size_t i = 0; i < n; ++i) sink(i, simulate_user(personas[i], config, registry, *proposer, keep_audit));
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::condition_variable ready;
    std::vector<std::optional<UserTrace>> slots(n);
    std::exception_ptr error;

    auto work = [&] {
        try {
            auto proposer = factory();
            for (std::size_t i = next++; i < n; i = next++) {
                UserTrace trace = simulate_user(personas[i], config, registry, *proposer, keep_audit);
                std::lock_guard lock(mutex);
                slots[i] = std::move(trace);
                ready.notify_all();
            }
        } catch (...) {
            std::lock_guard lock(mutex);
            if (!error) error = std::current_exception();
            next = n;
            ready.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::size_t i = 0; i < n; ++i) {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return slots[i].has_value() || error; });
        if (error) break;
        UserTrace trace = std::move(*slots[i]);
        slots[i].reset();
        lock.unlock();
        try {
            sink(i, std::move(trace));
        } catch (...) {
            std::lock_guard relock(mutex);
            if (!error) error = std::current_exception();
            next = n;
            break;
        }
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<UserTrace> simulate_corpus(const std::vector<AugmentedPersona>& personas, const EngineConfig& config,
                                       const RuleRegistry& registry, const ProposerFactory& factory, int jobs) {
    std::vector<UserTrace> traces(personas.size());
    for_each_trace(personas, config, registry, factory, jobs,
                   [&](std::size_t i, UserTrace&& t) { traces[i] = std::move(t); });
    return traces;
}

std::string run_dir_name(const EngineConfig& config) {
    return fmt::format("{}-s{}", config_hash_hex(config), config.seed);
}

}  // namespace ledgerloop
