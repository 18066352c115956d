#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "ledgerloop/persona.hpp"
#include "ledgerloop/rules.hpp"

namespace ledgerloop {

/// One simulated day of dialogue.
struct Turn {
    Date date;
    std::string prompt;    // user message
    std::string response;  // serialized accepted plan
    std::string summary;   // one line for the history block
};

/// Sliding window of the last N days, oldest evicted first.
class ConversationWindow {
public:
    explicit ConversationWindow(std::size_t days = 7) : capacity_(days) {}
    void push(Turn turn);
    const std::deque<Turn>& turns() const { return turns_; }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return turns_.empty(); }

private:
    std::size_t capacity_;
    std::deque<Turn> turns_;
};

struct PromptSpec {
    Date date;
    std::string system;
    std::string user;
    std::vector<PromptFragment> fragments;
    std::vector<Violation> feedback;
    std::optional<DailyPlan> previous_plan;
    int attempt = 0;  // 0 for the first proposal of the day
};

/// System message: persona, financial status and the reply schema.
std::string system_prompt(const AugmentedPersona& persona);

/// Deterministic prompt assembly. `outcome.fragments` must already hold the
/// rule fragments for the day; `outcome.violations` become feedback with remedies.
PromptSpec build_next_prompt(const RuleRegistry& registry, const LedgerState& state, Date date,
                             const RuleOutcome& outcome, const ConversationWindow& history,
                             const AugmentedPersona* persona = nullptr);

/// "Today is Friday, 2024-12-27." plus " Today is Christmas." on holidays.
std::string calendar_line(Date date);

}  // namespace ledgerloop
