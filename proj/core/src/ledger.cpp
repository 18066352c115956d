#include "ledgerloop/ledger.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ledgerloop/config.hpp"
#include "ledgerloop/rng.hpp"

namespace ledgerloop {

namespace {

constexpr int kIncomeMinute = 1;
constexpr int kSubscriptionMinute = 5;
constexpr int kBillMinute = 30;
constexpr int kCollectionMinute = 23 * 60 + 57;
constexpr int kFeeMinute = 23 * 60 + 58;
constexpr int kInterestMinute = 23 * 60 + 59;

void fold(LedgerState& state, const std::string& bytes) {
    state.history_digest = mix64(state.history_digest ^ fnv1a64(bytes));
}

Date first_occurrence(const ScheduledCharge& c, Date from) {
    Date d = make_clamped(from.year(), from.month(), static_cast<unsigned>(c.date_to_charge));
    if (d < from) d = d.plus_months(1, static_cast<unsigned>(c.date_to_charge));
    return d;
}

ScheduleEntry* find_schedule(std::vector<ScheduleEntry>& list, std::string_view merchant) {
    for (auto& e : list)
        if (e.charge.merchant_name == merchant) return &e;
    return nullptr;
}

TransactionEvent engine_event(Date date, int minute, EventKind kind, std::string merchant, std::string type,
                              Money amount, std::string category) {
    TransactionEvent e;
    e.timestamp = {date, minute};
    e.merchant_name = std::move(merchant);
    e.merchant_type = std::move(type);
    e.card_present = false;
    e.amount = amount;
    e.kind = kind;
    e.engine_initiated = true;
    e.category = std::move(category);
    return e;
}

TransactionEvent collection_payment(Date date, int minute, Money amount) {
    return engine_event(date, minute, EventKind::payment, "Card Issuer", "Collection Payment", -amount, "payment");
}

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::purchase: return "purchase";
        case EventKind::payment: return "payment";
        case EventKind::subscription_charge: return "subscription_charge";
        case EventKind::recurring_bill: return "recurring_bill";
        case EventKind::interest: return "interest";
        case EventKind::fee: return "fee";
        case EventKind::income_deposit: return "income_deposit";
        case EventKind::cancel_subscription: return "cancel_subscription";
    }
    return "purchase";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    for (int i = 0; i <= static_cast<int>(EventKind::cancel_subscription); ++i) {
        auto k = static_cast<EventKind>(i);
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

int expected_sign(EventKind kind) {
    switch (kind) {
        case EventKind::payment: return -1;
        case EventKind::cancel_subscription: return 0;
        default: return 1;
    }
}

bool is_exportable(EventKind kind) {
    return kind != EventKind::income_deposit && kind != EventKind::cancel_subscription;
}

std::string_view to_string(ControlKind kind) {
    switch (kind) {
        case ControlKind::begin_day: return "begin_day";
        case ControlKind::roll_statement: return "roll_statement";
        case ControlKind::skip_charge: return "skip_charge";
        case ControlKind::terminate: return "terminate";
    }
    return "begin_day";
}

std::optional<ControlKind> parse_control_kind(std::string_view text) {
    for (int i = 0; i <= static_cast<int>(ControlKind::terminate); ++i) {
        auto k = static_cast<ControlKind>(i);
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

Date next_paycheck_on_or_after(const std::vector<int>& days, Date from) {
    std::optional<Date> best;
    for (int month_offset = 0; month_offset < 2; ++month_offset) {
        for (int d : days) {
            Date candidate = from.plus_months(month_offset, static_cast<unsigned>(d));
            if (candidate >= from && (!best || candidate < *best)) best = candidate;
        }
        if (best) break;
    }
    return best.value_or(from);
}

LedgerState init_state(const FinancialProfile& profile, Date start_date, const EngineConfig& config) {
    LedgerState s;
    s.paycheck = config.paycheck.for_level(profile.income_level);
    s.cash = Money::from_cents(round_half_up(static_cast<double>(s.paycheck.cents()) * config.starting_cash_multiple));
    s.credit_limit = profile.credit_limit;
    s.paycheck_days = config.paycheck_days;
    std::sort(s.paycheck_days.begin(), s.paycheck_days.end());
    if (!s.paycheck_days.empty()) s.next_income_date = next_paycheck_on_or_after(s.paycheck_days, start_date);
    for (const auto& c : profile.subscriptions) s.subscriptions.push_back({c, first_occurrence(c, start_date)});
    for (const auto& c : profile.recurring_variable_bills) s.bills.push_back({c, first_occurrence(c, start_date)});
    s.current_date = start_date;
    s.owns_car = profile.owns_car();
    return s;
}

void apply_event_unchecked(LedgerState& s, TransactionEvent& e) {
    if (e.seq == 0) e.seq = s.next_seq;
    s.next_seq = std::max(s.next_seq, e.seq + 1);
    const Date date = e.timestamp.date;
    switch (e.kind) {
        case EventKind::purchase:
            s.credit_balance += e.amount;
            s.day.spending += e.amount;
            if (!e.category.empty()) s.last_purchase_dates[e.category] = date;
            break;
        case EventKind::subscription_charge:
        case EventKind::recurring_bill: {
            s.credit_balance += e.amount;
            s.day.spending += e.amount;
            auto& list = e.kind == EventKind::subscription_charge ? s.subscriptions : s.bills;
            if (auto* entry = find_schedule(list, e.merchant_name)) {
                entry->next_date = entry->next_date.plus_months(entry->charge.charge_frequency_month,
                                                                static_cast<unsigned>(entry->charge.date_to_charge));
            } else if (e.kind == EventKind::subscription_charge) {
                // A charge from a merchant with no schedule is a new sign-up.
                ScheduledCharge c;
                c.date_to_charge = static_cast<int>(date.day());
                c.amount = e.amount;
                c.charge_frequency_month = 1;
                c.merchant_name = e.merchant_name;
                c.product_description = e.merchant_type;
                s.subscriptions.push_back({c, date.plus_months(1, date.day())});
            }
            break;
        }
        case EventKind::interest:
            s.credit_balance += e.amount;
            s.day.interest += e.amount;
            s.accrued_interest_this_cycle += e.amount;
            break;
        case EventKind::fee:
            s.credit_balance += e.amount;
            s.day.fees += e.amount;
            s.accrued_fees_this_cycle += e.amount;
            break;
        case EventKind::payment: {
            const Money paid = e.amount.abs();
            s.cash -= paid;
            s.credit_balance -= paid;
            s.day.payment += paid;
            if (s.due_date && date <= *s.due_date) {
                s.paid_by_due += paid;
                s.statement_balance_due = max(Money{}, s.statement_balance_due - paid);
            }
            break;
        }
        case EventKind::income_deposit:
            s.cash += e.amount;
            s.day.income += e.amount;
            if (!s.paycheck_days.empty())
                s.next_income_date = next_paycheck_on_or_after(s.paycheck_days, date.plus_days(1));
            break;
        case EventKind::cancel_subscription:
            std::erase_if(s.subscriptions, [&](const ScheduleEntry& x) { return x.charge.merchant_name == e.merchant_name; });
            break;
    }
    fold(s, to_json(e).dump());
}

void apply_control(LedgerState& s, const Control& c) {
    switch (c.kind) {
        case ControlKind::begin_day:
            s.current_date = c.date;
            s.day = {};
            break;
        case ControlKind::roll_statement:
            s.statement_amount = s.credit_balance;
            s.statement_balance_due = s.credit_balance;
            s.paid_by_due = {};
            s.due_date = c.date;
            s.accrued_interest_this_cycle = {};
            s.accrued_fees_this_cycle = {};
            break;
        case ControlKind::skip_charge:
            if (auto* entry = find_schedule(s.bills, c.merchant))
                entry->next_date = entry->next_date.plus_months(entry->charge.charge_frequency_month,
                                                                static_cast<unsigned>(entry->charge.date_to_charge));
            break;
        case ControlKind::terminate:
            s.terminated_illiquid = true;
            s.illiquid_date = c.date;
            break;
    }
    fold(s, to_json(c).dump());
}

LedgerState apply_event(const LedgerState& state, const TransactionEvent& event) {
    auto violations = check_event(state, event);
    if (!violations.empty()) {
        auto message = fmt::format("apply_event on a violating event: {}", violations.front().code);
        throw ContractViolation(message, std::move(violations));
    }
    LedgerState next = state;
    TransactionEvent e = event;
    apply_event_unchecked(next, e);
    return next;
}

TransactionEvent commit(LedgerState& state, TransactionEvent event, Journal* journal) {
    auto violations = check_event(state, event);
    if (!violations.empty()) {
        auto message = fmt::format("commit of a violating event: {} ({})", violations.front().code,
                                   violations.front().message);
        throw ContractViolation(message, std::move(violations));
    }
    apply_event_unchecked(state, event);
    if (journal != nullptr) journal->on_transition(Transition::of(event), state);
    return event;
}

void commit(LedgerState& state, const Control& control, Journal* journal) {
    apply_control(state, control);
    if (journal != nullptr) journal->on_transition(Transition::of(control), state);
}

std::vector<TransactionEvent> post_scheduled_items(LedgerState& s, Date date, Rng& rng, Journal* journal) {
    std::vector<TransactionEvent> posted;
    if (s.next_income_date && *s.next_income_date == date) {
        posted.push_back(commit(s, engine_event(date, kIncomeMinute, EventKind::income_deposit, "Employer Payroll",
                                                "Payroll Deposit", s.paycheck, "income"),
                                journal));
    }

    // Subscriptions: charge at face value, or cancel when the card cannot take it.
    int minute = kSubscriptionMinute;
    std::vector<ScheduleEntry> due_subs;
    for (const auto& entry : s.subscriptions)
        if (entry.next_date == date) due_subs.push_back(entry);
    for (const auto& entry : due_subs) {
        const auto& c = entry.charge;
        if (s.credit_balance + c.amount > s.credit_limit) {
            posted.push_back(commit(s, engine_event(date, minute++, EventKind::cancel_subscription, c.merchant_name,
                                                    c.product_description, Money{}, "subscription"),
                                    journal));
            continue;
        }
        posted.push_back(commit(s, engine_event(date, minute++, EventKind::subscription_charge, c.merchant_name,
                                                c.product_description, c.amount, "subscription"),
                                journal));
    }

    // Bills: amount ~ max(0.01, N(amount, std)); utilities are never declined, the
    // issuer collects from checking first when the card has no room.
    minute = kBillMinute;
    std::vector<ScheduleEntry> due_bills;
    for (const auto& entry : s.bills)
        if (entry.next_date == date) due_bills.push_back(entry);
    for (const auto& entry : due_bills) {
        const auto& c = entry.charge;
        Money amount = c.amount;
        if (c.stddev.is_positive()) {
            double draw = rng.normal(static_cast<double>(c.amount.cents()), static_cast<double>(c.stddev.cents()));
            amount = Money::from_cents(std::max<std::int64_t>(1, round_half_up(draw)));
        }
        if (amount > s.credit_limit) {
            commit(s, Control{ControlKind::skip_charge, date, c.merchant_name}, journal);
            continue;
        }
        const Money room = s.credit_limit - s.credit_balance;
        if (amount > room) posted.push_back(commit(s, collection_payment(date, minute, amount - room), journal));
        posted.push_back(commit(s, engine_event(date, minute++, EventKind::recurring_bill, c.merchant_name,
                                                c.product_description, amount, "bill"),
                                journal));
    }
    return posted;
}

Money interest_on(Money carried, double monthly_rate) {
    if (!carried.is_positive()) return {};
    auto cents = round_half_up(static_cast<double>(carried.cents()) * monthly_rate);
    return Money::from_cents(std::max<std::int64_t>(1, cents));
}

Money minimum_payment(Money statement, double min_fraction) {
    if (!statement.is_positive()) return {};
    return Money::from_cents(std::max<std::int64_t>(1, round_half_up(static_cast<double>(statement.cents()) * min_fraction)));
}

std::vector<TransactionEvent> close_statement(LedgerState& s, Date date, const EngineConfig& config, Journal* journal) {
    std::vector<TransactionEvent> posted;
    if (s.due_date && s.statement_amount.is_positive()) {
        const Money interest = interest_on(s.statement_balance_due, config.monthly_interest_rate);
        const Money fee =
            s.paid_by_due < minimum_payment(s.statement_amount, config.min_payment_fraction) ? config.late_fee : Money{};
        const Money over = s.credit_balance + interest + fee - s.credit_limit;
        if (over.is_positive()) posted.push_back(commit(s, collection_payment(date, kCollectionMinute, over), journal));
        if (fee.is_positive())
            posted.push_back(
                commit(s, engine_event(date, kFeeMinute, EventKind::fee, "Card Issuer", "Late Fee", fee, "fee"), journal));
        if (interest.is_positive())
            posted.push_back(commit(s,
                                    engine_event(date, kInterestMinute, EventKind::interest, "Card Issuer",
                                                 "Interest Charge", interest, "interest"),
                                    journal));
    }
    commit(s, Control{ControlKind::roll_statement, date.plus_days(config.grace_days), {}}, journal);
    return posted;
}

std::vector<Date> income_dates_between(const LedgerState& s, Date after, Date until) {
    std::vector<Date> out;
    if (s.paycheck_days.empty()) return out;
    for (Date d = next_paycheck_on_or_after(s.paycheck_days, after.plus_days(1)); d <= until;
         d = next_paycheck_on_or_after(s.paycheck_days, d.plus_days(1)))
        out.push_back(d);
    return out;
}

std::vector<Date> schedule_dates(const ScheduleEntry& entry, Date from, Date until) {
    std::vector<Date> out;
    const auto dom = static_cast<unsigned>(entry.charge.date_to_charge);
    const int step = std::max(1, entry.charge.charge_frequency_month);
    Date d = entry.next_date;
    for (int k = 0; d <= until; ++k) {
        if (d >= from) out.push_back(d);
        d = entry.next_date.plus_months(step * (k + 1), dom);
    }
    return out;
}

Money scheduled_outflows_between(const LedgerState& s, Date after, Date until) {
    Money total;
    for (const auto* list : {&s.subscriptions, &s.bills})
        for (const auto& entry : *list)
            for (Date d : schedule_dates(entry, after.plus_days(1), until)) {
                (void)d;
                total += entry.charge.amount;
            }
    return total;
}

}  // namespace ledgerloop
