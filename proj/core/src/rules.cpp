#include "ledgerloop/rules.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace ledgerloop {

std::string_view to_string(PromptFragment::Kind kind) {
    using K = PromptFragment::Kind;
    switch (kind) {
        case K::calendar: return "calendar";
        case K::cadence: return "cadence";
        case K::notification: return "notification";
        case K::forced_charge: return "forced_charge";
        case K::remedy: return "remedy";
        case K::warning: return "warning";
    }
    return "warning";
}

bool RuleOutcome::has_hard() const {
    return std::any_of(violations.begin(), violations.end(), [](const Violation& v) { return v.severity == Severity::hard; });
}

std::vector<std::size_t> RuleOutcome::offending_indices() const {
    std::vector<std::size_t> out;
    for (const auto& v : violations)
        if (v.severity == Severity::hard && v.offending_event_index) out.push_back(*v.offending_event_index);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void Rule::check_event(const LedgerState&, const TransactionEvent&, std::optional<std::size_t>,
                       std::vector<Violation>&) const {}
void Rule::check_plan(const PlanContext&, std::vector<Violation>&) const {}
std::vector<TransactionEvent> Rule::update(const LedgerState&, Date, Rng&) const { return {}; }
std::vector<PromptFragment> Rule::prompt_fragment(const LedgerState&, Date, const RuleOutcome&, Rng&) const { return {}; }

RuleRegistry& RuleRegistry::register_rule(std::shared_ptr<const Rule> rule) {
    if (!rule) throw std::invalid_argument("null rule");
    if (contains(rule->id())) throw DuplicateRule(fmt::format("rule '{}' already registered", rule->id()));
    rules_.push_back(std::move(rule));
    return *this;
}

bool RuleRegistry::contains(std::string_view id) const {
    return std::any_of(rules_.begin(), rules_.end(), [&](const auto& r) { return r->id() == id; });
}

std::vector<std::shared_ptr<const Rule>> RuleRegistry::rules() const {
    std::vector<std::shared_ptr<const Rule>> out;
    for (auto cls : {RuleClass::invariant, RuleClass::realism})
        for (const auto& r : rules_)
            if (r->rule_class() == cls) out.push_back(r);
    return out;
}

std::vector<std::string> RuleRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& r : rules()) out.emplace_back(r->id());
    return out;
}

std::vector<Violation> RuleRegistry::check_event(const LedgerState& state, const TransactionEvent& event,
                                                 std::optional<std::size_t> index, bool invariants_only) const {
    std::vector<Violation> out;
    for (const auto& r : rules()) {
        if (invariants_only && r->rule_class() != RuleClass::invariant) continue;
        r->check_event(state, event, index, out);
    }
    return out;
}

RuleOutcome RuleRegistry::evaluate_plan(const LedgerState& state, const std::vector<TransactionEvent>& plan) const {
    RuleOutcome outcome;
    LedgerState hypothetical = state;
    std::vector<bool> accepted(plan.size(), false);
    const auto ordered = rules();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        std::vector<Violation> found;
        for (const auto& r : ordered) r->check_event(hypothetical, plan[i], i, found);
        const bool hard =
            std::any_of(found.begin(), found.end(), [](const Violation& v) { return v.severity == Severity::hard; });
        outcome.violations.insert(outcome.violations.end(), found.begin(), found.end());
        if (hard) continue;
        TransactionEvent copy = plan[i];
        apply_event_unchecked(hypothetical, copy);
        accepted[i] = true;
    }
    PlanContext ctx{state, hypothetical, plan, accepted};
    for (const auto& r : ordered) r->check_plan(ctx, outcome.violations);
    return outcome;
}

std::vector<PromptFragment> RuleRegistry::fragments(const LedgerState& state, Date date, const RuleOutcome& outcome,
                                                    std::uint64_t seed, std::string_view user_id) const {
    std::vector<PromptFragment> out;
    for (const auto& r : rules()) {
        Rng rng = Rng::derive(seed, fmt::format("rule:{}:{}", r->id(), user_id), static_cast<std::uint64_t>(date.serial()));
        auto part = r->prompt_fragment(state, date, outcome, rng);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

bool liquidity_exceeded(Money outflows, Money inflows, Money cash, Money available_credit) {
    return outflows > inflows + cash + available_credit;
}

std::optional<Violation> liquidity_check(const LedgerState& state, int window_days,
                                         const std::vector<TransactionEvent>& planned) {
    const Date today = state.current_date;
    const Date until = today.plus_days(window_days);
    const Money inflows =
        Money::from_cents(state.paycheck.cents() * static_cast<std::int64_t>(income_dates_between(state, today, until).size()));
    Money outflows = scheduled_outflows_between(state, today, until);
    const Money capacity = inflows + state.cash + state.available_credit();
    for (std::size_t i = 0; i < planned.size(); ++i) {
        const auto& e = planned[i];
        if (expected_sign(e.kind) <= 0 || e.kind == EventKind::income_deposit) continue;
        outflows += e.amount;
        if (liquidity_exceeded(outflows, inflows, state.cash, state.available_credit())) {
            Violation v;
            v.rule_id = "liquidity_solvency";
            v.code = "LIQUIDITY";
            v.message = fmt::format(
                "Planned and scheduled outflows of {} over the next {} days exceed income {} + cash {} + available "
                "credit {}.",
                format_usd(outflows), window_days, format_usd(inflows), format_usd(state.cash),
                format_usd(state.available_credit()));
            v.offending_event_index = i;
            const Money headroom = capacity - (outflows - e.amount);
            v.bound = max(Money{}, headroom);
            v.suggested_remedy = fmt::format("Postpone or shrink discretionary purchases; at most {} more can be spent "
                                             "without running out of funds.",
                                             format_usd(*v.bound));
            return v;
        }
    }
    return std::nullopt;
}

bool random_event_triggered(double u, double probability) { return u < probability; }

std::optional<PromptFragment> maybe_random_event(const LedgerState&, Date date, Rng& rng, double probability,
                                                 const Catalog& catalog) {
    if (!random_event_triggered(rng.uniform(), probability) || catalog.random_events().empty()) return std::nullopt;
    const auto& events = catalog.random_events();
    const auto& t = events[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(events.size()) - 1))];
    TransactionEvent e;
    e.timestamp = {date, 12 * 60};
    e.merchant_name = t.merchant_name;
    e.merchant_type = t.merchant_type;
    e.card_present = t.card_present;
    e.amount = Money::from_cents(rng.uniform_int(t.low.cents(), t.high.cents()));
    e.kind = EventKind::purchase;
    e.category = "random_event";
    PromptFragment f;
    f.kind = PromptFragment::Kind::forced_charge;
    f.rule_id = "random_events";
    f.text = fmt::format("{}: include a {} charge from {} ({}) today.", t.name, format_usd(e.amount), t.merchant_name,
                         t.merchant_type);
    f.event = std::move(e);
    return f;
}

}  // namespace ledgerloop
