#include <algorithm>

#include <fmt/format.h>

#include "ledgerloop/config.hpp"
#include "ledgerloop/rules.hpp"

namespace ledgerloop {

namespace {

Violation make(std::string_view rule, std::string_view code, std::string message, std::optional<std::size_t> index,
               std::optional<std::string> remedy = std::nullopt, std::optional<Money> bound = std::nullopt) {
    Violation v;
    v.rule_id = std::string(rule);
    v.code = std::string(code);
    v.message = std::move(message);
    v.offending_event_index = index;
    v.suggested_remedy = std::move(remedy);
    v.bound = bound;
    return v;
}

const ScheduleEntry* find(const std::vector<ScheduleEntry>& list, std::string_view merchant) {
    for (const auto& e : list)
        if (e.charge.merchant_name == merchant) return &e;
    return nullptr;
}

bool is_charge(EventKind k) {
    return k == EventKind::purchase || k == EventKind::subscription_charge || k == EventKind::recurring_bill ||
           k == EventKind::interest || k == EventKind::fee;
}

class CashConservation final : public Rule {
public:
    std::string_view id() const override { return "cash_conservation"; }
    RuleClass rule_class() const override { return RuleClass::invariant; }
    std::vector<std::string_view> codes() const override { return {"PAYMENT_EXCEEDS_CASH", "UNSCHEDULED_INCOME"}; }

    void check_event(const LedgerState& s, const TransactionEvent& e, std::optional<std::size_t> index,
                     std::vector<Violation>& out) const override {
        if (e.kind == EventKind::payment && !e.engine_initiated && e.amount.is_negative() && e.amount.abs() > s.cash) {
            const Money bound = max(Money{}, min(s.cash, s.credit_balance));
            out.push_back(make(id(), "PAYMENT_EXCEEDS_CASH",
                               fmt::format("Payment of {} exceeds checking cash of {}.", format_usd(e.amount.abs()),
                                           format_usd(s.cash)),
                               index, fmt::format("Pay at most {} (available checking cash).", format_usd(bound)), bound));
        }
        if (e.kind == EventKind::income_deposit) {
            const bool scheduled = e.engine_initiated && s.next_income_date &&
                                   e.timestamp.date == *s.next_income_date && e.amount == s.paycheck;
            if (!scheduled)
                out.push_back(make(id(), "UNSCHEDULED_INCOME",
                                   "Income can only arrive as the scheduled paycheck; funds cannot be created.", index,
                                   "Remove the income entry; paychecks are posted automatically."));
        }
    }

    std::vector<PromptFragment> prompt_fragment(const LedgerState&, Date, const RuleOutcome& outcome,
                                                Rng&) const override {
        std::vector<PromptFragment> out;
        for (const auto& e : outcome.forced_events)
            if (e.kind == EventKind::income_deposit)
                out.push_back({PromptFragment::Kind::notification, std::string(id()),
                               fmt::format("Paycheck of {} deposited to checking.", format_usd(e.amount)), std::nullopt});
        return out;
    }
};

class CreditBalance final : public Rule {
public:
    std::string_view id() const override { return "credit_balance"; }
    RuleClass rule_class() const override { return RuleClass::invariant; }
    std::vector<std::string_view> codes() const override {
        return {"CREDIT_LIMIT_EXCEEDED", "OVERPAYMENT", "MALFORMED_EVENT"};
    }

    void check_event(const LedgerState& s, const TransactionEvent& e, std::optional<std::size_t> index,
                     std::vector<Violation>& out) const override {
        const int sign = expected_sign(e.kind);
        const bool sign_ok = (sign > 0 && e.amount.is_positive()) || (sign < 0 && e.amount.is_negative()) ||
                             (sign == 0 && e.amount.is_zero());
        if (!sign_ok || e.merchant_name.empty() || e.merchant_type.empty()) {
            out.push_back(make(id(), "MALFORMED_EVENT",
                               fmt::format("{} of {} at '{}' has the wrong sign or missing merchant fields.",
                                           to_string(e.kind), e.amount.str(), e.merchant_name),
                               index, "Charges are positive, payments negative; name the merchant and its type."));
            return;
        }
        if (is_charge(e.kind) && s.credit_balance + e.amount > s.credit_limit) {
            const Money room = s.available_credit();
            out.push_back(make(id(), "CREDIT_LIMIT_EXCEEDED",
                               fmt::format("{} at {} would bring the balance to {} over the {} limit.",
                                           format_usd(e.amount), e.merchant_name, format_usd(s.credit_balance + e.amount),
                                           format_usd(s.credit_limit)),
                               index,
                               fmt::format("Drop this charge or keep it within the remaining credit of {}.", format_usd(room)),
                               room));
        }
        if (e.kind == EventKind::payment && e.amount.abs() > s.credit_balance) {
            out.push_back(make(id(), "OVERPAYMENT",
                               fmt::format("Payment of {} exceeds the current credit balance of {}.",
                                           format_usd(e.amount.abs()), format_usd(s.credit_balance)),
                               index,
                               fmt::format("Submit a payment of at most {}, the current credit balance.",
                                           format_usd(s.credit_balance)),
                               s.credit_balance));
        }
    }
};

class DueDateCompliance final : public Rule {
public:
    std::string_view id() const override { return "due_date_compliance"; }
    RuleClass rule_class() const override { return RuleClass::invariant; }
    std::vector<std::string_view> codes() const override { return {"DATE_MISMATCH", "ENGINE_ONLY_KIND"}; }

    void check_event(const LedgerState& s, const TransactionEvent& e, std::optional<std::size_t> index,
                     std::vector<Violation>& out) const override {
        if (e.timestamp.date != s.current_date) {
            out.push_back(make(id(), "DATE_MISMATCH",
                               fmt::format("Transaction dated {} but today is {}.", e.timestamp.date.iso(),
                                           s.current_date.iso()),
                               index, fmt::format("Date every transaction {}.", s.current_date.iso())));
        }
        if ((e.kind == EventKind::fee || e.kind == EventKind::interest) && !e.engine_initiated) {
            out.push_back(make(id(), "ENGINE_ONLY_KIND",
                               fmt::format("{} entries are assessed by the issuer at statement close.", to_string(e.kind)),
                               index, "Remove fee and interest entries from the plan."));
        }
    }

    std::vector<PromptFragment> prompt_fragment(const LedgerState& s, Date date, const RuleOutcome&,
                                                Rng&) const override {
        if (!s.due_date || !s.statement_balance_due.is_positive()) return {};
        const auto days = *s.due_date - date;
        if (days < 0 || days > 3) return {};
        return {{PromptFragment::Kind::warning, std::string(id()),
                 fmt::format("Statement balance of {} is due {}.", format_usd(s.statement_balance_due),
                             days == 0 ? std::string("today") : fmt::format("in {} day{}", days, days == 1 ? "" : "s")),
                 std::nullopt}};
    }
};

class SubscriptionCarryover final : public Rule {
public:
    std::string_view id() const override { return "subscription_carryover"; }
    RuleClass rule_class() const override { return RuleClass::invariant; }
    std::vector<std::string_view> codes() const override {
        return {"DUPLICATE_SCHEDULED_CHARGE", "UNKNOWN_SUBSCRIPTION"};
    }

    void check_event(const LedgerState& s, const TransactionEvent& e, std::optional<std::size_t> index,
                     std::vector<Violation>& out) const override {
        if (e.kind == EventKind::subscription_charge || e.kind == EventKind::recurring_bill) {
            const auto* entry =
                find(e.kind == EventKind::subscription_charge ? s.subscriptions : s.bills, e.merchant_name);
            if (entry != nullptr && entry->next_date != e.timestamp.date) {
                out.push_back(make(id(), "DUPLICATE_SCHEDULED_CHARGE",
                                   fmt::format("{} is next due on {}; it was already charged this period.",
                                               e.merchant_name, entry->next_date.iso()),
                                   index, "Do not repeat scheduled charges; they post automatically."));
            }
            if (entry == nullptr && e.kind == EventKind::recurring_bill) {
                out.push_back(make(id(), "UNKNOWN_SUBSCRIPTION",
                                   fmt::format("No recurring bill from {} is on file.", e.merchant_name), index,
                                   "Record one-off bills as purchases."));
            }
        }
        if (e.kind == EventKind::cancel_subscription && find(s.subscriptions, e.merchant_name) == nullptr) {
            out.push_back(make(id(), "UNKNOWN_SUBSCRIPTION",
                               fmt::format("Cannot cancel {}: no active subscription.", e.merchant_name), index,
                               "Only cancel subscriptions that are listed as active."));
        }
    }

    std::vector<PromptFragment> prompt_fragment(const LedgerState&, Date, const RuleOutcome& outcome,
                                                Rng&) const override {
        std::vector<PromptFragment> out;
        for (const auto& e : outcome.forced_events) {
            std::string text;
            if (e.kind == EventKind::subscription_charge)
                text = fmt::format("{} subscription charged {}.", e.merchant_name, format_usd(e.amount));
            else if (e.kind == EventKind::recurring_bill)
                text = fmt::format("{} ({}) billed {}.", e.merchant_name, e.merchant_type, format_usd(e.amount));
            else if (e.kind == EventKind::cancel_subscription)
                text = fmt::format("{} was declined for lack of credit and has been cancelled.", e.merchant_name);
            else if (e.kind == EventKind::payment && e.engine_initiated)
                text = fmt::format("The issuer collected {} from checking to keep the card within its limit.",
                                   format_usd(e.amount.abs()));
            else
                continue;
            out.push_back({PromptFragment::Kind::notification, std::string(id()), std::move(text), std::nullopt});
        }
        return out;
    }
};

class LiquiditySolvency final : public Rule {
public:
    explicit LiquiditySolvency(int window) : window_(window) {}
    std::string_view id() const override { return "liquidity_solvency"; }
    RuleClass rule_class() const override { return RuleClass::invariant; }
    std::vector<std::string_view> codes() const override { return {"LIQUIDITY", "TERMINATED"}; }

    void check_event(const LedgerState& s, const TransactionEvent&, std::optional<std::size_t> index,
                     std::vector<Violation>& out) const override {
        if (s.terminated_illiquid)
            out.push_back(make(id(), "TERMINATED", "The account was closed as illiquid; no further activity.", index));
    }

    void check_plan(const PlanContext& ctx, std::vector<Violation>& out) const override {
        std::vector<TransactionEvent> planned;
        std::vector<std::size_t> origin;
        for (std::size_t i = 0; i < ctx.plan.size(); ++i) {
            if (!ctx.accepted[i]) continue;
            planned.push_back(ctx.plan[i]);
            origin.push_back(i);
        }
        if (auto v = liquidity_check(ctx.start, window_, planned)) {
            v->offending_event_index = origin[*v->offending_event_index];
            out.push_back(std::move(*v));
        }
    }

private:
    int window_;
};

class TemporalCadence final : public Rule {
public:
    explicit TemporalCadence(CadenceConfig cfg) : cfg_(cfg) {}
    std::string_view id() const override { return "temporal_cadence"; }
    RuleClass rule_class() const override { return RuleClass::realism; }
    std::vector<std::string_view> codes() const override { return {"CADENCE_TOO_FREQUENT", "FUEL_WITHOUT_CAR"}; }

    void check_event(const LedgerState& s, const TransactionEvent& e, std::optional<std::size_t> index,
                     std::vector<Violation>& out) const override {
        if (e.kind != EventKind::purchase) return;
        const auto severity = cfg_.strict ? Severity::hard : Severity::soft;
        if (e.category == "fuel" && !s.owns_car) {
            auto v = make(id(), "FUEL_WITHOUT_CAR", fmt::format("Fuel at {} but the user owns no car.", e.merchant_name),
                          index, "Drop fuel purchases; use transit or ride share instead.");
            v.severity = severity;
            out.push_back(std::move(v));
        }
        const int gap = gap_for(e.category);
        if (gap <= 0) return;
        auto it = s.last_purchase_dates.find(e.category);
        if (it == s.last_purchase_dates.end()) return;
        const auto since = e.timestamp.date - it->second;
        if (since < gap) {
            auto v = make(id(), "CADENCE_TOO_FREQUENT",
                          fmt::format("{} purchase only {} day{} after the last one (minimum gap {} days).", e.category,
                                      since, since == 1 ? "" : "s", gap),
                          index, fmt::format("Space {} purchases at least {} days apart.", e.category, gap));
            v.severity = severity;
            out.push_back(std::move(v));
        }
    }

    std::vector<PromptFragment> prompt_fragment(const LedgerState& s, Date date, const RuleOutcome&,
                                                Rng&) const override {
        std::vector<PromptFragment> out;
        for (const char* category : {"groceries", "fuel"}) {
            auto it = s.last_purchase_dates.find(category);
            if (it == s.last_purchase_dates.end()) continue;
            const auto since = date - it->second;
            out.push_back({PromptFragment::Kind::cadence, std::string(id()),
                           fmt::format("Last {} purchase: {} day{} ago (minimum gap {} days).", category, since,
                                       since == 1 ? "" : "s", gap_for(category)),
                           std::nullopt});
        }
        return out;
    }

private:
    int gap_for(std::string_view category) const {
        if (category == "groceries") return cfg_.groceries_min_gap_days;
        if (category == "fuel") return cfg_.fuel_min_gap_days;
        return 0;
    }
    CadenceConfig cfg_;
};

class RandomEvents final : public Rule {
public:
    RandomEvents(double probability, const Catalog& catalog) : probability_(probability), catalog_(catalog) {}
    std::string_view id() const override { return "random_events"; }
    RuleClass rule_class() const override { return RuleClass::realism; }
    std::vector<std::string_view> codes() const override { return {}; }

    std::vector<PromptFragment> prompt_fragment(const LedgerState& s, Date date, const RuleOutcome&,
                                                Rng& rng) const override {
        if (auto f = maybe_random_event(s, date, rng, probability_, catalog_)) return {std::move(*f)};
        return {};
    }

private:
    double probability_;
    const Catalog& catalog_;
};

}  // namespace

const std::vector<std::string>& builtin_rule_ids() {
    static const std::vector<std::string> ids = {"cash_conservation",      "credit_balance",     "due_date_compliance",
                                                 "subscription_carryover", "liquidity_solvency", "temporal_cadence",
                                                 "random_events"};
    return ids;
}

std::shared_ptr<const Rule> make_builtin_rule(std::string_view id, const EngineConfig& config, const Catalog& catalog) {
    if (id == "cash_conservation") return std::make_shared<CashConservation>();
    if (id == "credit_balance") return std::make_shared<CreditBalance>();
    if (id == "due_date_compliance") return std::make_shared<DueDateCompliance>();
    if (id == "subscription_carryover") return std::make_shared<SubscriptionCarryover>();
    if (id == "liquidity_solvency") return std::make_shared<LiquiditySolvency>(config.liquidity_window_days);
    if (id == "temporal_cadence") return std::make_shared<TemporalCadence>(config.cadence);
    if (id == "random_events") return std::make_shared<RandomEvents>(config.random_event_prob, catalog);
    throw std::invalid_argument(fmt::format("unknown rule '{}'", id));
}

RuleRegistry make_registry(const EngineConfig& config, const Catalog& catalog) {
    RuleRegistry registry;
    for (const auto& id : config.rules) registry.register_rule(make_builtin_rule(id, config, catalog));
    return registry;
}

std::vector<Violation> check_event(const LedgerState& state, const TransactionEvent& event) {
    static const RuleRegistry invariants = [] {
        RuleRegistry r;
        EngineConfig defaults;
        for (const char* id : {"cash_conservation", "credit_balance", "due_date_compliance", "subscription_carryover",
                               "liquidity_solvency"})
            r.register_rule(make_builtin_rule(id, defaults));
        return r;
    }();
    return invariants.check_event(state, event);
}

}  // namespace ledgerloop
