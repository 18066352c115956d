#include <fmt/format.h>

#include "ledgerloop/ledger.hpp"
#include "ledgerloop/rng.hpp"

namespace ledgerloop {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json opt_date(const std::optional<Date>& d) { return d ? json(d->iso()) : json(nullptr); }

std::optional<Date> read_opt_date(const json& j) {
    if (j.is_null()) return std::nullopt;
    auto d = Date::parse(j.get<std::string>());
    if (!d) throw std::runtime_error("bad date in snapshot");
    return d;
}

Date read_date(const json& j) {
    auto d = Date::parse(j.get<std::string>());
    if (!d) throw std::runtime_error(fmt::format("bad date '{}'", j.dump()));
    return *d;
}

Money cents(const json& j) { return Money::from_cents(j.get<std::int64_t>()); }

json schedule_json(const ScheduleEntry& e) {
    return {{"date_to_charge", e.charge.date_to_charge},
            {"amount", e.charge.amount.cents()},
            {"charge_frequency_month", e.charge.charge_frequency_month},
            {"std", e.charge.stddev.cents()},
            {"merchant_name", e.charge.merchant_name},
            {"product_description", e.charge.product_description},
            {"next_date", e.next_date.iso()}};
}

ScheduleEntry schedule_from(const json& j) {
    ScheduleEntry e;
    e.charge.date_to_charge = j.at("date_to_charge").get<int>();
    e.charge.amount = cents(j.at("amount"));
    e.charge.charge_frequency_month = j.at("charge_frequency_month").get<int>();
    e.charge.stddev = cents(j.at("std"));
    e.charge.merchant_name = j.at("merchant_name").get<std::string>();
    e.charge.product_description = j.at("product_description").get<std::string>();
    e.next_date = read_date(j.at("next_date"));
    return e;
}

}  // namespace

json to_json(const LedgerState& s) {
    json j;
    j["cash"] = s.cash.cents();
    j["credit_balance"] = s.credit_balance.cents();
    j["credit_limit"] = s.credit_limit.cents();
    j["statement_amount"] = s.statement_amount.cents();
    j["statement_balance_due"] = s.statement_balance_due.cents();
    j["due_date"] = opt_date(s.due_date);
    j["paid_by_due"] = s.paid_by_due.cents();
    j["paycheck"] = s.paycheck.cents();
    j["paycheck_days"] = s.paycheck_days;
    j["next_income_date"] = opt_date(s.next_income_date);
    j["subscriptions"] = json::array();
    for (const auto& e : s.subscriptions) j["subscriptions"].push_back(schedule_json(e));
    j["bills"] = json::array();
    for (const auto& e : s.bills) j["bills"].push_back(schedule_json(e));
    j["last_purchase_dates"] = json::object();
    for (const auto& [k, d] : s.last_purchase_dates) j["last_purchase_dates"][k] = d.iso();
    j["accrued_interest_this_cycle"] = s.accrued_interest_this_cycle.cents();
    j["accrued_fees_this_cycle"] = s.accrued_fees_this_cycle.cents();
    j["current_date"] = s.current_date.iso();
    j["owns_car"] = s.owns_car;
    j["terminated_illiquid"] = s.terminated_illiquid;
    j["illiquid_date"] = opt_date(s.illiquid_date);
    j["day"] = {{"spending", s.day.spending.cents()},
                {"payment", s.day.payment.cents()},
                {"income", s.day.income.cents()},
                {"interest", s.day.interest.cents()},
                {"fees", s.day.fees.cents()}};
    j["next_seq"] = s.next_seq;
    j["history_digest"] = hex64(s.history_digest);
    return j;
}

LedgerState state_from_json(const json& j) {
    LedgerState s;
    s.cash = cents(j.at("cash"));
    s.credit_balance = cents(j.at("credit_balance"));
    s.credit_limit = cents(j.at("credit_limit"));
    s.statement_amount = cents(j.at("statement_amount"));
    s.statement_balance_due = cents(j.at("statement_balance_due"));
    s.due_date = read_opt_date(j.at("due_date"));
    s.paid_by_due = cents(j.at("paid_by_due"));
    s.paycheck = cents(j.at("paycheck"));
    s.paycheck_days = j.at("paycheck_days").get<std::vector<int>>();
    s.next_income_date = read_opt_date(j.at("next_income_date"));
    for (const auto& e : j.at("subscriptions")) s.subscriptions.push_back(schedule_from(e));
    for (const auto& e : j.at("bills")) s.bills.push_back(schedule_from(e));
    for (const auto& [k, d] : j.at("last_purchase_dates").items()) s.last_purchase_dates[k] = read_date(d);
    s.accrued_interest_this_cycle = cents(j.at("accrued_interest_this_cycle"));
    s.accrued_fees_this_cycle = cents(j.at("accrued_fees_this_cycle"));
    s.current_date = read_date(j.at("current_date"));
    s.owns_car = j.at("owns_car").get<bool>();
    s.terminated_illiquid = j.at("terminated_illiquid").get<bool>();
    s.illiquid_date = read_opt_date(j.at("illiquid_date"));
    const auto& d = j.at("day");
    s.day = {cents(d.at("spending")), cents(d.at("payment")), cents(d.at("income")), cents(d.at("interest")),
             cents(d.at("fees"))};
    s.next_seq = j.at("next_seq").get<std::uint64_t>();
    s.history_digest = std::stoull(j.at("history_digest").get<std::string>(), nullptr, 16);
    return s;
}

std::uint64_t state_hash(const LedgerState& state) { return fnv1a64(to_json(state).dump()); }

ordered_json to_json(const TransactionEvent& e) {
    ordered_json j;
    j["seq"] = e.seq;
    j["timestamp"] = e.timestamp.iso();
    j["merchant_name"] = e.merchant_name;
    j["merchant_type"] = e.merchant_type;
    j["card_present_or_not"] = e.card_present;
    j["amount"] = e.amount.str();
    j["kind"] = to_string(e.kind);
    j["engine_initiated"] = e.engine_initiated;
    j["category"] = e.category;
    return j;
}

TransactionEvent event_from_json(const json& j) {
    TransactionEvent e;
    e.seq = j.value("seq", std::uint64_t{0});
    auto ts = Timestamp::parse(j.at("timestamp").get<std::string>());
    if (!ts) throw std::runtime_error("bad event timestamp");
    e.timestamp = *ts;
    e.merchant_name = j.at("merchant_name").get<std::string>();
    e.merchant_type = j.at("merchant_type").get<std::string>();
    e.card_present = j.at("card_present_or_not").get<bool>();
    auto amount = Money::parse(j.at("amount").get<std::string>());
    if (!amount) throw std::runtime_error("bad event amount");
    e.amount = *amount;
    auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("bad event kind");
    e.kind = *kind;
    e.engine_initiated = j.value("engine_initiated", false);
    e.category = j.value("category", "");
    return e;
}

ordered_json to_json(const Control& c) {
    ordered_json j;
    j["control"] = to_string(c.kind);
    j["date"] = c.date.iso();
    if (!c.merchant.empty()) j["merchant"] = c.merchant;
    return j;
}

Control control_from_json(const json& j) {
    Control c;
    auto kind = parse_control_kind(j.at("control").get<std::string>());
    if (!kind) throw std::runtime_error("bad control kind");
    c.kind = *kind;
    c.date = read_date(j.at("date"));
    c.merchant = j.value("merchant", "");
    return c;
}

ordered_json to_json(const Violation& v) {
    ordered_json j;
    j["rule_id"] = v.rule_id;
    j["code"] = v.code;
    j["message"] = v.message;
    j["severity"] = v.severity == Severity::hard ? "hard" : "soft";
    if (v.offending_event_index) j["offending_event_index"] = *v.offending_event_index;
    if (v.suggested_remedy) j["suggested_remedy"] = *v.suggested_remedy;
    if (v.bound) j["bound"] = v.bound->str();
    return j;
}

ordered_json export_json(const std::string& user_id, const TransactionEvent& e) {
    ordered_json j;
    j["user_id"] = user_id;
    j["seq"] = e.seq;
    j["kind"] = to_string(e.kind);
    j["timestamp"] = e.timestamp.iso();
    j["merchant_name"] = e.merchant_name;
    j["merchant_type"] = e.merchant_type;
    j["card_present_or_not"] = e.card_present;
    j["amount"] = e.amount.str();
    return j;
}

}  // namespace ledgerloop
