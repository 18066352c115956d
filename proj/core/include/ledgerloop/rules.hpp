#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerloop/catalog.hpp"
#include "ledgerloop/ledger.hpp"
#include "ledgerloop/plan.hpp"
#include "ledgerloop/rng.hpp"

namespace ledgerloop {

struct EngineConfig;

enum class RuleClass { invariant, realism };

struct PromptFragment {
    enum class Kind { calendar, cadence, notification, forced_charge, remedy, warning };

    Kind kind = Kind::warning;
    std::string rule_id;
    std::string text;
    /// forced_charge: the event the proposer must include.
    std::optional<TransactionEvent> event;

    friend bool operator==(const PromptFragment&, const PromptFragment&) = default;
};

std::string_view to_string(PromptFragment::Kind kind);

struct RuleOutcome {
    std::vector<Violation> violations;
    /// Events the engine itself posted (scheduled items) or must see posted.
    std::vector<TransactionEvent> forced_events;
    std::vector<PromptFragment> fragments;

    bool has_hard() const;
    /// Sorted, distinct offending indices of hard violations.
    std::vector<std::size_t> offending_indices() const;

    friend bool operator==(const RuleOutcome&, const RuleOutcome&) = default;
};

/// Plan-level view handed to Rule::check_plan.
struct PlanContext {
    const LedgerState& start;
    const LedgerState& end;  // after every accepted draft
    const std::vector<TransactionEvent>& plan;
    const std::vector<bool>& accepted;
};

/// A constraint with the check / update / next_prompt template.
class Rule {
public:
    virtual ~Rule() = default;
    virtual std::string_view id() const = 0;
    virtual RuleClass rule_class() const = 0;
    /// Closed set of violation codes this rule may emit.
    virtual std::vector<std::string_view> codes() const = 0;

    virtual void check_event(const LedgerState& state, const TransactionEvent& event, std::optional<std::size_t> index,
                             std::vector<Violation>& out) const;
    virtual void check_plan(const PlanContext& ctx, std::vector<Violation>& out) const;
    /// Events the rule forces onto the ledger for `date`.
    virtual std::vector<TransactionEvent> update(const LedgerState& state, Date date, Rng& rng) const;
    virtual std::vector<PromptFragment> prompt_fragment(const LedgerState& state, Date date, const RuleOutcome& outcome,
                                                        Rng& rng) const;
};

class DuplicateRule : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Ordered rule set. Evaluation order: invariant rules, then realism rules,
/// each in registration order. Immutable once shared across workers.
class RuleRegistry {
public:
    RuleRegistry& register_rule(std::shared_ptr<const Rule> rule);

    std::size_t size() const { return rules_.size(); }
    bool contains(std::string_view id) const;
    /// In evaluation order.
    std::vector<std::shared_ptr<const Rule>> rules() const;
    std::vector<std::string> ids() const;

    std::vector<Violation> check_event(const LedgerState& state, const TransactionEvent& event,
                                       std::optional<std::size_t> index = std::nullopt,
                                       bool invariants_only = false) const;

    /// Runs every check over the plan applied hypothetically in order; drafts
    /// with hard violations are skipped. Never mutates `state`.
    RuleOutcome evaluate_plan(const LedgerState& state, const std::vector<TransactionEvent>& plan) const;
    RuleOutcome evaluate_plan(const LedgerState& state, const DailyPlan& plan) const {
        return evaluate_plan(state, plan.events);
    }

    /// Prompt fragments of every rule; each rule draws from its own stream keyed by (seed, user, rule, day).
    std::vector<PromptFragment> fragments(const LedgerState& state, Date date, const RuleOutcome& outcome,
                                          std::uint64_t seed, std::string_view user_id) const;

private:
    std::vector<std::shared_ptr<const Rule>> rules_;
};

/// Built-in rule ids in documented order.
const std::vector<std::string>& builtin_rule_ids();
std::shared_ptr<const Rule> make_builtin_rule(std::string_view id, const EngineConfig& config,
                                              const Catalog& catalog = Catalog::builtin());
/// All rules listed in config.rules.
RuleRegistry make_registry(const EngineConfig& config, const Catalog& catalog = Catalog::builtin());

/// Window check: violation iff planned outflows plus scheduled outflows over
/// (today, today + window] exceed scheduled income + cash + available credit.
/// The offending index is the first planned outflow at which the prefix exceeds.
std::optional<Violation> liquidity_check(const LedgerState& state, int window_days,
                                         const std::vector<TransactionEvent>& planned);

/// The raw inequality, exposed for boundary tests.
bool liquidity_exceeded(Money outflows, Money inflows, Money cash, Money available_credit);

/// One trigger decision: uniform draw u against probability p.
bool random_event_triggered(double u, double probability);
/// Draws one uniform; on a trigger picks a catalog template uniformly and an
/// amount uniformly in its [low, high] cents range.
std::optional<PromptFragment> maybe_random_event(const LedgerState& state, Date date, Rng& rng, double probability,
                                                 const Catalog& catalog = Catalog::builtin());

}  // namespace ledgerloop
