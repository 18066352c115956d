#include "ledgerloop/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ledgerloop/rng.hpp"

namespace ledgerloop {

using nlohmann::json;
using nlohmann::ordered_json;

Money PaycheckTable::for_level(IncomeLevel level) const {
    switch (level) {
        case IncomeLevel::low: return low;
        case IncomeLevel::med: return med;
        case IncomeLevel::high: return high;
    }
    return med;
}

namespace {

double usd(Money m) { return m.dollars(); }

Money read_usd(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_string()) {
        auto m = Money::parse(v.get<std::string>());
        if (!m) throw ConfigError(fmt::format("{}: not a decimal amount", key));
        return *m;
    }
    if (!v.is_number()) throw ConfigError(fmt::format("{}: must be a number", key));
    return Money::from_dollars_rounded(v.get<double>());
}

template <typename T>
T read(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
}

/// Overlays `patch` onto `base`, refusing keys that `base` does not have.
void merge_strict(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError(fmt::format("{}: expected an object", path.empty() ? "config" : path));
    for (const auto& [key, value] : patch.items()) {
        auto full = path.empty() ? key : path + "." + key;
        auto it = base.find(key);
        if (it == base.end()) throw ConfigError(fmt::format("unknown config key '{}'", full));
        if (it->is_object() && value.is_object())
            merge_strict(*it, value, full);
        else
            *it = value;
    }
}

}  // namespace

ordered_json to_json(const EngineConfig& c) {
    ordered_json j;
    j["start_date"] = c.start_date.iso();
    j["max_days"] = c.max_days;
    j["horizon"] = {{"enabled", c.horizon.enabled}, {"min_days", c.horizon.min_days}, {"max_days", c.horizon.max_days}};
    j["monthly_interest_rate"] = c.monthly_interest_rate;
    j["late_fee"] = usd(c.late_fee);
    j["grace_days"] = c.grace_days;
    j["min_payment_fraction"] = c.min_payment_fraction;
    j["liquidity_window_days"] = c.liquidity_window_days;
    j["overdraft_allowance"] = usd(c.overdraft_allowance);
    j["random_event_prob"] = c.random_event_prob;
    j["repair_retries"] = c.repair_retries;
    j["max_events_per_day"] = c.max_events_per_day;
    j["history_days"] = c.history_days;
    j["seed"] = c.seed;
    j["holiday_years"] = {c.holiday_first_year, c.holiday_last_year};
    j["starting_cash_multiple"] = c.starting_cash_multiple;
    j["paycheck"] = {{"low", usd(c.paycheck.low)}, {"med", usd(c.paycheck.med)}, {"high", usd(c.paycheck.high)}};
    j["paycheck_days"] = c.paycheck_days;
    j["cadence"] = {{"groceries_min_gap_days", c.cadence.groceries_min_gap_days},
                    {"fuel_min_gap_days", c.cadence.fuel_min_gap_days},
                    {"strict", c.cadence.strict}};
    j["mock"] = {{"spend_scale", c.mock.spend_scale},
                 {"error_rate", c.mock.error_rate},
                 {"signup_prob", c.mock.signup_prob},
                 {"cancel_prob", c.mock.cancel_prob}};
    j["external"] = {{"endpoint", c.external.endpoint},
                     {"model", c.external.model},
                     {"api_key_env", c.external.api_key_env},
                     {"temperature", c.external.temperature},
                     {"timeout_seconds", c.external.timeout_seconds},
                     {"parse_retries", c.external.parse_retries},
                     {"http_retries", c.external.http_retries},
                     {"max_concurrency", c.external.max_concurrency},
                     {"max_consecutive_failures", c.external.max_consecutive_failures}};
    j["rules"] = c.rules;
    return j;
}

EngineConfig config_from_json(const json& patch) {
    json doc = json(to_json(EngineConfig{}));
    json body = patch;
    if (body.is_object() && body.contains("preset")) {
        doc = json(to_json(preset(read<std::string>(body, "preset"))));
        body.erase("preset");
    }
    merge_strict(doc, body, "");

    EngineConfig c;
    auto start = Date::parse(read<std::string>(doc, "start_date"));
    if (!start) throw ConfigError("start_date: expected YYYY-MM-DD");
    c.start_date = *start;
    c.max_days = read<int>(doc, "max_days");
    const auto& h = doc.at("horizon");
    c.horizon = {read<bool>(h, "enabled"), read<int>(h, "min_days"), read<int>(h, "max_days")};
    c.monthly_interest_rate = read<double>(doc, "monthly_interest_rate");
    c.late_fee = read_usd(doc, "late_fee");
    c.grace_days = read<int>(doc, "grace_days");
    c.min_payment_fraction = read<double>(doc, "min_payment_fraction");
    c.liquidity_window_days = read<int>(doc, "liquidity_window_days");
    c.overdraft_allowance = read_usd(doc, "overdraft_allowance");
    c.random_event_prob = read<double>(doc, "random_event_prob");
    c.repair_retries = read<int>(doc, "repair_retries");
    c.max_events_per_day = read<int>(doc, "max_events_per_day");
    c.history_days = read<int>(doc, "history_days");
    c.seed = read<std::uint64_t>(doc, "seed");
    auto years = read<std::vector<int>>(doc, "holiday_years");
    if (years.size() != 2) throw ConfigError("holiday_years: expected [first, last]");
    c.holiday_first_year = years[0];
    c.holiday_last_year = years[1];
    c.starting_cash_multiple = read<double>(doc, "starting_cash_multiple");
    const auto& p = doc.at("paycheck");
    c.paycheck = {read_usd(p, "low"), read_usd(p, "med"), read_usd(p, "high")};
    c.paycheck_days = read<std::vector<int>>(doc, "paycheck_days");
    const auto& cad = doc.at("cadence");
    c.cadence = {read<int>(cad, "groceries_min_gap_days"), read<int>(cad, "fuel_min_gap_days"), read<bool>(cad, "strict")};
    const auto& m = doc.at("mock");
    c.mock = {read<double>(m, "spend_scale"), read<double>(m, "error_rate"), read<double>(m, "signup_prob"),
              read<double>(m, "cancel_prob")};
    const auto& e = doc.at("external");
    c.external.endpoint = read<std::string>(e, "endpoint");
    c.external.model = read<std::string>(e, "model");
    c.external.api_key_env = read<std::string>(e, "api_key_env");
    c.external.temperature = read<double>(e, "temperature");
    c.external.timeout_seconds = read<int>(e, "timeout_seconds");
    c.external.parse_retries = read<int>(e, "parse_retries");
    c.external.http_retries = read<int>(e, "http_retries");
    c.external.max_concurrency = read<int>(e, "max_concurrency");
    c.external.max_consecutive_failures = read<int>(e, "max_consecutive_failures");
    c.rules = read<std::vector<std::string>>(doc, "rules");
    validate_config(c);
    return c;
}

void validate_config(const EngineConfig& c) {
    std::vector<std::string> problems;
    auto rate = [&](const char* name, double v) {
        if (!(v >= 0.0 && v <= 1.0)) problems.push_back(fmt::format("{} must be in [0,1]", name));
    };
    rate("monthly_interest_rate", c.monthly_interest_rate);
    rate("min_payment_fraction", c.min_payment_fraction);
    rate("random_event_prob", c.random_event_prob);
    rate("mock.error_rate", c.mock.error_rate);
    rate("mock.signup_prob", c.mock.signup_prob);
    rate("mock.cancel_prob", c.mock.cancel_prob);
    if (c.max_days < 1) problems.push_back("max_days must be >= 1");
    if (c.horizon.enabled && (c.horizon.min_days < 1 || c.horizon.max_days < c.horizon.min_days))
        problems.push_back("horizon must satisfy 1 <= min_days <= max_days");
    if (c.repair_retries < 0) problems.push_back("repair_retries must be >= 0");
    if (c.grace_days < 1 || c.grace_days > 27) problems.push_back("grace_days must be in [1,27]");
    if (c.liquidity_window_days < 1) problems.push_back("liquidity_window_days must be >= 1");
    if (c.max_events_per_day < 1) problems.push_back("max_events_per_day must be >= 1");
    if (c.history_days < 0) problems.push_back("history_days must be >= 0");
    if (c.late_fee.is_negative()) problems.push_back("late_fee must be >= 0");
    if (c.overdraft_allowance.is_positive()) problems.push_back("overdraft_allowance must be <= 0");
    if (c.starting_cash_multiple < 0.0) problems.push_back("starting_cash_multiple must be >= 0");
    if (c.mock.spend_scale <= 0.0) problems.push_back("mock.spend_scale must be > 0");
    if (!c.paycheck.low.is_positive() || !c.paycheck.med.is_positive() || !c.paycheck.high.is_positive())
        problems.push_back("paycheck amounts must be positive");
    for (int d : c.paycheck_days)
        if (d < 1 || d > 31) problems.push_back("paycheck_days must be in [1,31]");
    if (c.holiday_first_year > c.holiday_last_year) problems.push_back("holiday_years must be ordered");
    if (c.external.parse_retries < 0 || c.external.http_retries < 0) problems.push_back("retries must be >= 0");
    if (c.external.max_concurrency < 1) problems.push_back("external.max_concurrency must be >= 1");
    if (!problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
}

EngineConfig preset(std::string_view name) {
    EngineConfig c;
    if (name == "default") return c;
    if (name == "stressed") {
        c.paycheck = {Money::from_dollars(700), Money::from_dollars(1300), Money::from_dollars(2600)};
        c.mock.spend_scale = 1.6;
        c.starting_cash_multiple = 0.5;
        return c;
    }
    if (name == "affluent") {
        c.paycheck = {Money::from_dollars(4200), Money::from_dollars(7800), Money::from_dollars(15600)};
        c.mock.spend_scale = 0.6;
        c.starting_cash_multiple = 4.0;
        return c;
    }
    throw ConfigError(fmt::format("unknown preset '{}'", name));
}

std::vector<std::string> preset_names() { return {"default", "stressed", "affluent"}; }

void apply_override(json& doc, std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError(fmt::format("override '{}': expected key=value", assignment));
    std::string key(assignment.substr(0, eq));
    std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        auto dot = key.find('.', pos);
        auto part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty()) throw ConfigError(fmt::format("override '{}': empty key segment", key));
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        pos = dot + 1;
    }
}

EngineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError(fmt::format("cannot open config {}", path));
        std::stringstream ss;
        ss << in.rdbuf();
        doc = json::parse(ss.str(), nullptr, false);
        if (doc.is_discarded()) throw ConfigError(fmt::format("{}: malformed JSON", path));
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

std::uint64_t config_hash(const EngineConfig& config) { return fnv1a64(to_json(config).dump()); }

std::string config_hash_hex(const EngineConfig& config) { return hex64(config_hash(config)); }

}  // namespace ledgerloop
