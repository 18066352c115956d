#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/calendar.hpp"
#include "ledgerloop/money.hpp"
#include "ledgerloop/persona.hpp"

namespace ledgerloop {

struct EngineConfig;
class Rng;

enum class EventKind {
    purchase,
    payment,
    subscription_charge,
    recurring_bill,
    interest,
    fee,
    income_deposit,
    cancel_subscription,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);
/// +1 for charges and income, -1 for payments, 0 for cancellations.
int expected_sign(EventKind kind);
/// Kinds that appear in the exported event stream.
bool is_exportable(EventKind kind);

struct TransactionEvent {
    std::uint64_t seq = 0;  // assigned when the ledger accepts the event
    Timestamp timestamp;
    std::string merchant_name;
    std::string merchant_type;
    bool card_present = false;
    Money amount;
    EventKind kind = EventKind::purchase;
    bool engine_initiated = false;
    std::string category;  // cadence bucket; not exported

    friend bool operator==(const TransactionEvent&, const TransactionEvent&) = default;
};

enum class Severity { hard, soft };

struct Violation {
    std::string rule_id;
    std::string code;
    std::string message;
    std::optional<std::size_t> offending_event_index;
    std::optional<std::string> suggested_remedy;
    Severity severity = Severity::hard;
    /// Largest amount that would have been accepted, when one exists.
    std::optional<Money> bound;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ScheduleEntry {
    ScheduledCharge charge;
    Date next_date;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Running totals for the current day.
struct DayDeltas {
    Money spending;
    Money payment;
    Money income;
    Money interest;
    Money fees;

    friend bool operator==(const DayDeltas&, const DayDeltas&) = default;
};

struct LedgerState {
    Money cash;
    Money credit_balance;
    Money credit_limit;
    Money statement_amount;       // balance at the last close
    Money statement_balance_due;  // part of statement_amount not yet paid on time
    std::optional<Date> due_date;
    Money paid_by_due;            // payments dated on or before due_date since the last close
    Money paycheck;
    std::vector<int> paycheck_days;
    std::optional<Date> next_income_date;
    std::vector<ScheduleEntry> subscriptions;
    std::vector<ScheduleEntry> bills;
    std::map<std::string, Date> last_purchase_dates;
    Money accrued_interest_this_cycle;
    Money accrued_fees_this_cycle;
    Date current_date;
    bool owns_car = true;
    bool terminated_illiquid = false;
    std::optional<Date> illiquid_date;
    DayDeltas day;
    std::uint64_t next_seq = 1;
    /// Folds every applied transition, so the state hash commits to history.
    std::uint64_t history_digest = 0;

    Money available_credit() const { return credit_limit - credit_balance; }

    friend bool operator==(const LedgerState&, const LedgerState&) = default;
};

/// Non-event state changes, recorded so replay is exact.
enum class ControlKind { begin_day, roll_statement, skip_charge, terminate };
std::string_view to_string(ControlKind kind);
std::optional<ControlKind> parse_control_kind(std::string_view text);

struct Control {
    ControlKind kind = ControlKind::begin_day;
    Date date;              // begin_day: new current date; roll_statement: new due date; terminate: illiquid date
    std::string merchant;   // skip_charge: bill whose period is skipped

    friend bool operator==(const Control&, const Control&) = default;
};

struct Transition {
    bool is_event = true;
    TransactionEvent event;
    Control control;

    static Transition of(TransactionEvent e) { return {true, std::move(e), {}}; }
    static Transition of(Control c) { return {false, {}, std::move(c)}; }
};

/// Receives every committed transition with the resulting state.
class Journal {
public:
    virtual ~Journal() = default;
    virtual void on_transition(const Transition& transition, const LedgerState& after) = 0;
};

class ContractViolation : public std::logic_error {
public:
    ContractViolation(const std::string& message, std::vector<Violation> violations)
        : std::logic_error(message), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

LedgerState init_state(const FinancialProfile& profile, Date start_date, const EngineConfig& config);

/// Invariant checks of the built-in rules against a single event.
std::vector<Violation> check_event(const LedgerState& state, const TransactionEvent& event);

/// Pure transition. Throws ContractViolation if check_event reports anything.
LedgerState apply_event(const LedgerState& state, const TransactionEvent& event);
/// In-place transition; assigns seq when the event has none. No checks.
void apply_event_unchecked(LedgerState& state, TransactionEvent& event);
void apply_control(LedgerState& state, const Control& control);

/// Checks (for events), applies, and notifies the journal. Returns the event with its seq.
TransactionEvent commit(LedgerState& state, TransactionEvent event, Journal* journal);
void commit(LedgerState& state, const Control& control, Journal* journal);

/// Posts income, subscription charges and bills due on `date` (which must be
/// state.current_date), in that order. Returns the committed events.
std::vector<TransactionEvent> post_scheduled_items(LedgerState& state, Date date, Rng& rng, Journal* journal = nullptr);

/// Month-end statement processing: collection payment if fees would breach the
/// limit, late fee, interest, then a new statement and due date.
std::vector<TransactionEvent> close_statement(LedgerState& state, Date date, const EngineConfig& config,
                                              Journal* journal = nullptr);

/// Interest owed on a carried amount: rate x carried, half-up, at least one cent when carried > 0.
Money interest_on(Money carried, double monthly_rate);
/// Minimum payment that avoids the late fee.
Money minimum_payment(Money statement, double min_fraction);

/// Paycheck dates in (after, until].
std::vector<Date> income_dates_between(const LedgerState& state, Date after, Date until);
/// First paycheck date on or after `from`.
Date next_paycheck_on_or_after(const std::vector<int>& days, Date from);
/// Expected scheduled outflows (subscriptions at face value, bills at their mean) in (after, until].
Money scheduled_outflows_between(const LedgerState& state, Date after, Date until);
/// Charge dates of one schedule in [from, until].
std::vector<Date> schedule_dates(const ScheduleEntry& entry, Date from, Date until);

/// Canonical snapshot: stable key order, integer cents.
nlohmann::json to_json(const LedgerState& state);
LedgerState state_from_json(const nlohmann::json& j);
std::uint64_t state_hash(const LedgerState& state);

nlohmann::ordered_json to_json(const TransactionEvent& event);
TransactionEvent event_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Control& control);
Control control_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Violation& violation);

/// The exported schema line: {user_id, seq, kind, timestamp, merchant_name,
/// merchant_type, card_present_or_not, amount}.
nlohmann::ordered_json export_json(const std::string& user_id, const TransactionEvent& event);

}  // namespace ledgerloop
