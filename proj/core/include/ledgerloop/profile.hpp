#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerloop/catalog.hpp"
#include "ledgerloop/chat_client.hpp"
#include "ledgerloop/persona.hpp"

namespace ledgerloop {

enum class ProfileMode { heuristic, external };

class ProfileDerivationError : public std::runtime_error {
public:
    ProfileDerivationError(const std::string& message, std::string raw)
        : std::runtime_error(message), raw_(std::move(raw)) {}
    const std::string& raw_response() const { return raw_; }

private:
    std::string raw_;
};

/// Income levels the lookup table allows for an (education, occupation) pair,
/// in ascending order. Never empty.
std::vector<IncomeLevel> permitted_income_levels(const std::string& education_level, const std::string& occupation);

/// Deterministic stand-in for model-based derivation; a pure function of (persona, seed).
FinancialProfile derive_profile_heuristic(const Persona& persona, std::uint64_t seed,
                                          const Catalog& catalog = Catalog::builtin());

/// Asks a chat endpoint, primed with the bundled in-context examples. One
/// reprompt on an unusable answer, then ProfileDerivationError.
FinancialProfile derive_profile_external(const Persona& persona, ChatClient& client);

/// `client` is required for ProfileMode::external.
FinancialProfile derive_financial_profile(const Persona& persona, ProfileMode mode, std::uint64_t seed,
                                          ChatClient* client = nullptr);

/// The messages sent for external derivation (exposed for tests and logging).
std::vector<ChatMessage> profile_request_messages(const Persona& persona);

}  // namespace ledgerloop
