#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerloop/ledger.hpp"

namespace ledgerloop {

/// One day's proposal: optional free-text reasoning plus event drafts (no seq).
struct DailyPlan {
    std::optional<std::string> reasoning;
    std::vector<TransactionEvent> events;

    friend bool operator==(const DailyPlan&, const DailyPlan&) = default;
};

enum class ParseErrorCode { malformed_json, missing_field, non_numeric_amount, invalid_field, too_many_events };

/// "MALFORMED_JSON", "MISSING_FIELD", "NON_NUMERIC_AMOUNT", "INVALID_FIELD", "TOO_MANY_EVENTS".
std::string_view to_string(ParseErrorCode code);

struct ParseError {
    ParseErrorCode code = ParseErrorCode::malformed_json;
    std::string message;
};

struct ParseResult {
    std::optional<DailyPlan> plan;
    std::optional<ParseError> error;

    bool ok() const { return plan.has_value(); }
};

/// Validates {reasoning?, transactions:[{merchant_name, merchant_type,
/// card_present_or_not, amount, kind, time?, date?, category?}]}. Amounts may be
/// decimal strings or numbers; the sign is taken from the kind. Drafts without a
/// date get `date`; without a time, a morning slot by position.
ParseResult parse_plan(std::string_view raw, Date date, int max_events = 25);

std::string serialize_plan(const DailyPlan& plan);

}  // namespace ledgerloop
