#include <fmt/format.h>

#include "ledgerloop/proposer.hpp"

namespace ledgerloop {

ExternalProposer::ExternalProposer(std::shared_ptr<ChatClient> client, const EngineConfig& config)
    : client_(std::move(client)),
      parse_retries_(config.external.parse_retries),
      max_events_(config.max_events_per_day) {}

std::vector<ChatMessage> ExternalProposer::messages_for(const PromptSpec& prompt, const ConversationWindow& window) {
    std::vector<ChatMessage> messages;
    messages.push_back({"system", prompt.system});
    for (const auto& turn : window.turns()) {
        if (turn.date >= prompt.date) continue;
        messages.push_back({"user", turn.prompt});
        messages.push_back({"assistant", turn.response});
    }
    if (prompt.previous_plan) messages.push_back({"assistant", serialize_plan(*prompt.previous_plan)});
    messages.push_back({"user", prompt.user});
    return messages;
}

DailyPlan ExternalProposer::propose(const PromptSpec& prompt, const AugmentedPersona&, const LedgerState&, Rng&,
                                    const ConversationWindow& window) {
    auto messages = messages_for(prompt, window);
    std::string raw;
    for (int attempt = 0; attempt <= parse_retries_; ++attempt) {
        try {
            raw = client_->complete(messages);
        } catch (const BackendError& e) {
            throw PlanUnavailable(e.what(), true, e.raw());
        }
        auto parsed = parse_plan(extract_json_object(raw), prompt.date, max_events_);
        if (parsed.ok()) return std::move(*parsed.plan);
        messages.push_back({"assistant", raw});
        messages.push_back({"user", fmt::format("Your reply could not be parsed ({}: {}). Reply with only the JSON "
                                                "object described in the instructions.",
                                                to_string(parsed.error->code), parsed.error->message)});
    }
    throw PlanUnavailable(fmt::format("no parseable plan after {} attempts", parse_retries_ + 1), false, raw);
}

}  // namespace ledgerloop
