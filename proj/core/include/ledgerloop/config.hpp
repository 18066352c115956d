#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/calendar.hpp"
#include "ledgerloop/money.hpp"
#include "ledgerloop/persona.hpp"

namespace ledgerloop {

struct PaycheckTable {
    Money low = Money::from_dollars(1400);
    Money med = Money::from_dollars(2600);
    Money high = Money::from_dollars(5200);

    Money for_level(IncomeLevel level) const;
};

struct CadenceConfig {
    int groceries_min_gap_days = 3;
    int fuel_min_gap_days = 5;
    bool strict = false;  // reject instead of warn
};

/// Behavior knobs of the mock proposer.
struct MockConfig {
    double spend_scale = 1.0;
    double error_rate = 0.02;       // chance per day of a deliberately wrong plan
    double signup_prob = 0.002;     // per day
    double cancel_prob = 0.002;     // per day
};

struct ExternalConfig {
    std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
    std::string model = "llama-3.3-70b-instruct";
    std::string api_key_env = "LEDGERLOOP_API_KEY";
    double temperature = 0.7;
    int timeout_seconds = 60;
    int parse_retries = 2;
    int http_retries = 2;
    int max_concurrency = 4;
    int max_consecutive_failures = 5;
};

/// Optional per-user simulation length drawn uniformly from [min_days, max_days].
struct HorizonSampler {
    bool enabled = false;
    int min_days = 89;
    int max_days = 1101;
};

struct EngineConfig {
    Date start_date = Date::from_ymd(2024, 1, 1);
    int max_days = 1101;
    HorizonSampler horizon;
    double monthly_interest_rate = 0.02;
    Money late_fee = Money::from_cents(3500);
    int grace_days = 21;
    double min_payment_fraction = 0.03;
    int liquidity_window_days = 30;
    Money overdraft_allowance = Money::from_cents(-10000);
    double random_event_prob = 0.10;
    int repair_retries = 3;
    int max_events_per_day = 25;
    int history_days = 7;
    std::uint64_t seed = 42;
    int holiday_first_year = 1990;
    int holiday_last_year = 2100;
    double starting_cash_multiple = 1.0;
    PaycheckTable paycheck;
    std::vector<int> paycheck_days = {1, 15};
    CadenceConfig cadence;
    MockConfig mock;
    ExternalConfig external;
    /// Enabled rule ids, in registration order.
    std::vector<std::string> rules = {"cash_conservation",    "credit_balance",     "due_date_compliance",
                                      "subscription_carryover", "liquidity_solvency", "temporal_cadence",
                                      "random_events"};
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::ordered_json to_json(const EngineConfig& config);
/// Strict: unknown keys and out-of-range values throw ConfigError. Missing keys keep defaults.
EngineConfig config_from_json(const nlohmann::json& j);
/// Throws ConfigError listing every broken invariant.
void validate_config(const EngineConfig& config);

/// Named presets: "default", "stressed", "affluent".
EngineConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Applies "dotted.key=value" to a JSON config document. The value is parsed
/// as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Loads a config file, optionally layered on a preset, then applies overrides.
EngineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// 64-bit hash of the canonical config serialization.
std::uint64_t config_hash(const EngineConfig& config);
/// 16 hex digits of config_hash.
std::string config_hash_hex(const EngineConfig& config);

}  // namespace ledgerloop
