#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ledgerloop/catalog.hpp"
#include "ledgerloop/chat_client.hpp"
#include "ledgerloop/config.hpp"
#include "ledgerloop/prompt.hpp"

namespace ledgerloop {

/// No usable plan: the backend failed, or replies stayed unparseable after the
/// configured reprompts. The engine falls back to a scheduled-items-only day.
class PlanUnavailable : public std::runtime_error {
public:
    PlanUnavailable(const std::string& message, bool backend_failure, std::string raw = {})
        : std::runtime_error(message), backend_failure_(backend_failure), raw_(std::move(raw)) {}
    bool backend_failure() const { return backend_failure_; }
    const std::string& raw() const { return raw_; }

private:
    bool backend_failure_;
    std::string raw_;
};

/// A proposal source pi(. | persona, state).
class Proposer {
public:
    virtual ~Proposer() = default;
    virtual std::string_view name() const = 0;
    virtual DailyPlan propose(const PromptSpec& prompt, const AugmentedPersona& persona, const LedgerState& state,
                              Rng& rng, const ConversationWindow& window) = 0;
};

/// Expected purchases per day and amount multiplier for each archetype.
double archetype_event_rate(Archetype archetype);
double archetype_amount_scale(Archetype archetype);

/// Deterministic persona-conditioned proposer. Fresh prompts draw a day of
/// purchases; prompts carrying feedback repair the previous plan.
class MockProposer final : public Proposer {
public:
    explicit MockProposer(const EngineConfig& config, const Catalog& catalog = Catalog::builtin());
    std::string_view name() const override { return "mock"; }
    DailyPlan propose(const PromptSpec& prompt, const AugmentedPersona& persona, const LedgerState& state, Rng& rng,
                      const ConversationWindow& window) override;

    /// Expected number of discretionary purchases on `date`.
    double expected_events(Archetype archetype, Date date) const;

private:
    DailyPlan fresh(const PromptSpec& prompt, const AugmentedPersona& persona, const LedgerState& state, Rng& rng) const;
    DailyPlan repair(const PromptSpec& prompt, const LedgerState& state) const;
    std::optional<TransactionEvent> payment_for(const AugmentedPersona& persona, const LedgerState& state, Date date) const;

    EngineConfig config_;
    const Catalog& catalog_;
};

/// Chat-completions proposer.
class ExternalProposer final : public Proposer {
public:
    ExternalProposer(std::shared_ptr<ChatClient> client, const EngineConfig& config);
    std::string_view name() const override { return "external"; }
    DailyPlan propose(const PromptSpec& prompt, const AugmentedPersona& persona, const LedgerState& state, Rng& rng,
                      const ConversationWindow& window) override;

    /// Messages for one request: system, the window as prompt/response pairs, then the prompt.
    static std::vector<ChatMessage> messages_for(const PromptSpec& prompt, const ConversationWindow& window);

private:
    std::shared_ptr<ChatClient> client_;
    int parse_retries_;
    int max_events_;
};

}  // namespace ledgerloop
