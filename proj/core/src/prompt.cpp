#include "ledgerloop/prompt.hpp"

#include <fmt/format.h>

namespace ledgerloop {

void ConversationWindow::push(Turn turn) {
    if (capacity_ == 0) return;
    // A day may be re-prompted; keep only its final turn.
    if (!turns_.empty() && turns_.back().date == turn.date) turns_.pop_back();
    turns_.push_back(std::move(turn));
    while (turns_.size() > capacity_) turns_.pop_front();
}

std::string calendar_line(Date date) {
    auto line = fmt::format("Today is {}, {}.", date.weekday_name(), date.iso());
    if (auto h = holiday_name(date)) line += fmt::format(" Today is {}.", *h);
    return line;
}

std::string system_prompt(const AugmentedPersona& p) {
    const auto& f = p.user_financial_profile;
    std::string out =
        "You are simulating the daily credit-card activity of the person below. Each day you receive the calendar, "
        "the account state and any required items, and you reply with that day's transactions.\n\n";
    out += "Persona:\n" + to_json(p.user_persona).dump() + "\n\n";
    out += fmt::format("Financial status: {}; credit limit {}; payment habit {}; {}; {}\n", to_string(f.income_level),
                       format_usd(f.credit_limit), to_string(f.payment_habit), f.car_ownership, f.spending_patterns);
    out += "\nReply with one JSON object: {\"reasoning\": \"...\", \"transactions\": [{\"merchant_name\": \"...\", "
           "\"merchant_type\": \"...\", \"card_present_or_not\": true, \"amount\": \"12.34\", \"kind\": "
           "\"purchase|payment|subscription_charge|cancel_subscription\", \"time\": \"HH:MM\"}]}. Payments reduce the "
           "card balance from checking cash. Scheduled subscriptions, bills, fees and interest are posted for you.";
    return out;
}

PromptSpec build_next_prompt(const RuleRegistry&, const LedgerState& s, Date date, const RuleOutcome& outcome,
                             const ConversationWindow& history, const AugmentedPersona* persona) {
    PromptSpec spec;
    spec.date = date;
    if (persona != nullptr) spec.system = system_prompt(*persona);
    spec.fragments = outcome.fragments;
    spec.feedback = outcome.violations;

    std::string u;
    u += "## Calendar\n" + calendar_line(date) + "\n";

    u += "\n## Account\n";
    u += fmt::format("Checking cash: {}\n", format_usd(s.cash));
    u += fmt::format("Credit balance: {} of {} limit (available {})\n", format_usd(s.credit_balance),
                     format_usd(s.credit_limit), format_usd(s.available_credit()));
    if (s.due_date && s.statement_balance_due.is_positive())
        u += fmt::format("Statement due: {} by {}\n", format_usd(s.statement_balance_due), s.due_date->iso());
    else
        u += "Statement due: nothing outstanding\n";
    if (s.next_income_date) u += fmt::format("Next paycheck: {} on {}\n", format_usd(s.paycheck), s.next_income_date->iso());

    auto block = [&](PromptFragment::Kind kind, std::string_view title) {
        std::string lines;
        for (const auto& f : outcome.fragments)
            if (f.kind == kind) lines += "- " + f.text + "\n";
        if (!lines.empty()) u += fmt::format("\n## {}\n{}", title, lines);
    };
    block(PromptFragment::Kind::cadence, "Purchase cadence");
    block(PromptFragment::Kind::notification, "Posted today");
    block(PromptFragment::Kind::warning, "Reminders");
    block(PromptFragment::Kind::forced_charge, "Required today");

    if (!outcome.violations.empty()) {
        u += "\n## Feedback on your previous plan\n";
        for (const auto& v : outcome.violations) {
            u += fmt::format("- [{}]", v.code);
            if (v.offending_event_index) u += fmt::format(" transaction #{}", *v.offending_event_index + 1);
            u += ": " + v.message;
            if (v.suggested_remedy) {
                u += " Remedy: " + *v.suggested_remedy;
                spec.fragments.push_back({PromptFragment::Kind::remedy, v.rule_id, *v.suggested_remedy, std::nullopt});
            }
            u += "\n";
        }
    }

    u += "\n## Recent history\n";
    if (history.empty()) {
        u += "No earlier days.\n";
    } else {
        for (const auto& t : history.turns()) u += "- " + t.summary + "\n";
    }
    spec.user = std::move(u);
    return spec;
}

}  // namespace ledgerloop
