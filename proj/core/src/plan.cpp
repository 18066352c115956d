#include "ledgerloop/plan.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace ledgerloop {

using nlohmann::json;

std::string_view to_string(ParseErrorCode code) {
    switch (code) {
        case ParseErrorCode::malformed_json: return "MALFORMED_JSON";
        case ParseErrorCode::missing_field: return "MISSING_FIELD";
        case ParseErrorCode::non_numeric_amount: return "NON_NUMERIC_AMOUNT";
        case ParseErrorCode::invalid_field: return "INVALID_FIELD";
        case ParseErrorCode::too_many_events: return "TOO_MANY_EVENTS";
    }
    return "MALFORMED_JSON";
}

namespace {

ParseResult fail(ParseErrorCode code, std::string message) { return {std::nullopt, ParseError{code, std::move(message)}}; }

std::optional<Money> parse_amount(const json& v) {
    if (v.is_string()) return Money::parse(v.get<std::string>());
    // Shortest round-trip rendering keeps "15.49" exact.
    if (v.is_number()) return Money::parse(v.dump());
    return std::nullopt;
}

}  // namespace

ParseResult parse_plan(std::string_view raw, Date date, int max_events) {
    json doc = json::parse(raw, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return fail(ParseErrorCode::malformed_json, "response is not a JSON object");

    DailyPlan plan;
    if (auto it = doc.find("reasoning"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) return fail(ParseErrorCode::invalid_field, "reasoning must be a string");
        plan.reasoning = it->get<std::string>();
    }
    auto txs = doc.find("transactions");
    if (txs == doc.end()) return fail(ParseErrorCode::missing_field, "missing field 'transactions'");
    if (!txs->is_array()) return fail(ParseErrorCode::invalid_field, "'transactions' must be an array");
    if (static_cast<int>(txs->size()) > max_events)
        return fail(ParseErrorCode::too_many_events,
                    fmt::format("{} transactions exceed the daily maximum of {}", txs->size(), max_events));

    for (std::size_t i = 0; i < txs->size(); ++i) {
        const auto& t = (*txs)[i];
        if (!t.is_object()) return fail(ParseErrorCode::malformed_json, fmt::format("transactions[{}] is not an object", i));
        for (const char* key : {"merchant_name", "merchant_type", "card_present_or_not", "amount", "kind"}) {
            if (!t.contains(key) || t.at(key).is_null())
                return fail(ParseErrorCode::missing_field, fmt::format("transactions[{}] missing field '{}'", i, key));
        }
        TransactionEvent e;
        const auto& name = t.at("merchant_name");
        const auto& type = t.at("merchant_type");
        if (!name.is_string() || name.get<std::string>().empty() || !type.is_string() || type.get<std::string>().empty())
            return fail(ParseErrorCode::invalid_field,
                        fmt::format("transactions[{}] merchant_name/merchant_type must be non-empty strings", i));
        e.merchant_name = name.get<std::string>();
        e.merchant_type = type.get<std::string>();
        const auto& card = t.at("card_present_or_not");
        if (!card.is_boolean())
            return fail(ParseErrorCode::invalid_field, fmt::format("transactions[{}] card_present_or_not must be boolean", i));
        e.card_present = card.get<bool>();

        auto amount = parse_amount(t.at("amount"));
        if (!amount)
            return fail(ParseErrorCode::non_numeric_amount,
                        fmt::format("transactions[{}] amount {} is not a decimal number", i, t.at("amount").dump()));
        const auto& kind_v = t.at("kind");
        auto kind = kind_v.is_string() ? parse_event_kind(kind_v.get<std::string>()) : std::nullopt;
        if (!kind) return fail(ParseErrorCode::invalid_field, fmt::format("transactions[{}] kind {} is unknown", i, kind_v.dump()));
        e.kind = *kind;
        switch (expected_sign(e.kind)) {
            case 1: e.amount = amount->abs(); break;
            case -1: e.amount = -amount->abs(); break;
            default: e.amount = *amount; break;
        }

        Date d = date;
        if (auto it = t.find("date"); it != t.end() && !it->is_null()) {
            auto parsed = it->is_string() ? Date::parse(it->get<std::string>()) : std::nullopt;
            if (!parsed) return fail(ParseErrorCode::invalid_field, fmt::format("transactions[{}] date must be YYYY-MM-DD", i));
            d = *parsed;
        }
        int minute = std::min(23 * 60, 10 * 60 + 30 * static_cast<int>(i));
        if (auto it = t.find("time"); it != t.end() && !it->is_null()) {
            auto parsed = it->is_string() ? Timestamp::parse_clock(it->get<std::string>()) : std::nullopt;
            if (!parsed) return fail(ParseErrorCode::invalid_field, fmt::format("transactions[{}] time must be HH:MM", i));
            minute = *parsed;
        }
        e.timestamp = {d, minute};
        if (auto it = t.find("category"); it != t.end() && it->is_string()) e.category = it->get<std::string>();
        plan.events.push_back(std::move(e));
    }
    return {std::move(plan), std::nullopt};
}

std::string serialize_plan(const DailyPlan& plan) {
    nlohmann::ordered_json j;
    if (plan.reasoning) j["reasoning"] = *plan.reasoning;
    j["transactions"] = nlohmann::ordered_json::array();
    for (const auto& e : plan.events) {
        nlohmann::ordered_json t;
        t["merchant_name"] = e.merchant_name;
        t["merchant_type"] = e.merchant_type;
        t["card_present_or_not"] = e.card_present;
        t["amount"] = e.amount.str();
        t["kind"] = to_string(e.kind);
        t["date"] = e.timestamp.date.iso();
        t["time"] = e.timestamp.clock();
        if (!e.category.empty()) t["category"] = e.category;
        j["transactions"].push_back(std::move(t));
    }
    return j.dump();
}

}  // namespace ledgerloop
