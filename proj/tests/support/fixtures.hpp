#pragma once

#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "ledgerloop/chat_client.hpp"
#include "ledgerloop/ledger.hpp"
#include "ledgerloop/persona.hpp"

namespace ledgerloop::test {

std::filesystem::path source_dir();
std::filesystem::path data_dir();
/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

inline Money usd(double dollars) { return Money::from_dollars_rounded(dollars); }
inline Money cents(std::int64_t c) { return Money::from_cents(c); }
inline Date day(int y, unsigned m, unsigned d) { return Date::from_ymd(y, m, d); }

ScheduledCharge subscription(const std::string& name, Money amount, int day_of_month);
ScheduledCharge bill(const std::string& name, Money amount, Money stddev, int day_of_month);

struct PersonaSpec {
    std::string user_id = "test-user";
    Archetype archetype = Archetype::balancer;
    IncomeLevel income = IncomeLevel::med;
    PaymentHabit habit = PaymentHabit::automatic_payment;
    Money credit_limit = Money::from_dollars(5000);
    std::string car = "owns_1_car";
    int age = 35;
    std::vector<ScheduledCharge> subscriptions;
    std::vector<ScheduledCharge> bills;
};

AugmentedPersona make_persona(const PersonaSpec& spec = {});
/// The worked example persona shipped in tests/data.
AugmentedPersona reference_persona();
/// First n records of data/sample_personas.jsonl.
std::vector<AugmentedPersona> sample_personas(std::size_t n);

/// A bare state: no schedules, no paychecks, no statement.
LedgerState make_state(Money cash, Money balance, Money limit, Date today);

TransactionEvent purchase(Date date, Money amount, const std::string& merchant = "Corner Market",
                          const std::string& type = "Convenience Store", int minute = 12 * 60,
                          const std::string& category = "retail");
TransactionEvent payment(Date date, Money amount, int minute = 20 * 60);

class RecordingJournal : public Journal {
public:
    void on_transition(const Transition& t, const LedgerState& after) override {
        transitions.push_back(t);
        states.push_back(after);
    }
    std::vector<Transition> transitions;
    std::vector<LedgerState> states;
};

/// Replays canned replies and records every request.
class ScriptedClient : public ChatClient {
public:
    explicit ScriptedClient(std::deque<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::vector<std::vector<ChatMessage>> requests;

private:
    std::deque<std::string> replies_;
};

}  // namespace ledgerloop::test
