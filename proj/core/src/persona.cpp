#include "ledgerloop/persona.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "ledgerloop/rng.hpp"

namespace ledgerloop {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    return std::string(text);
}

const std::vector<std::string_view> kFreeTextFields = {
    "persona", "professional_persona", "sports_persona", "arts_persona",
    "travel_persona", "culinary_persona", "career_goals_and_ambitions"};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Splits input into (record position, json) pairs. Whole-document JSON
/// (array or single object) is tried first, then JSON Lines.
std::vector<std::pair<std::size_t, json>> split_records(std::string_view text, std::vector<RecordError>& errors) {
    std::vector<std::pair<std::size_t, json>> records;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return records;

    json whole = json::parse(text, nullptr, false);
    if (!whole.is_discarded()) {
        if (whole.is_array()) {
            for (std::size_t i = 0; i < whole.size(); ++i) records.emplace_back(i + 1, whole[i]);
            return records;
        }
        if (whole.is_object()) {
            records.emplace_back(1, std::move(whole));
            return records;
        }
    }
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            errors.push_back({line_no, {{"record", "malformed JSON object"}}});
        else
            records.emplace_back(line_no, std::move(j));
        if (end == text.size()) break;
    }
    return records;
}

const json* persona_block(const json& record) {
    if (auto it = record.find("user_persona"); it != record.end() && it->is_object()) return &*it;
    if (record.contains("persona") && record.contains("occupation")) return &record;
    return nullptr;
}

std::string text_field(const json& j, std::string_view key, std::vector<ValidationIssue>& issues, bool required) {
    auto it = j.find(std::string(key));
    if (it == j.end() || it->is_null()) {
        if (required) issues.push_back({std::string(key), "missing"});
        return {};
    }
    if (!it->is_string()) {
        issues.push_back({std::string(key), "must be a string"});
        return {};
    }
    return it->get<std::string>();
}

ScheduledCharge charge_from_json(const json& j, const std::string& where, std::vector<ValidationIssue>& issues) {
    ScheduledCharge c;
    if (!j.is_object()) {
        issues.push_back({where, "must be an object"});
        return c;
    }
    auto number = [&](std::string_view key) -> std::optional<double> {
        auto it = j.find(std::string(key));
        if (it == j.end() || !it->is_number()) {
            issues.push_back({where + "." + std::string(key), "must be a number"});
            return std::nullopt;
        }
        return it->get<double>();
    };
    if (auto v = number("date_to_charge")) c.date_to_charge = static_cast<int>(*v);
    if (auto v = number("amount")) c.amount = Money::from_dollars_rounded(*v);
    if (auto v = number("charge_frequency_month")) c.charge_frequency_month = static_cast<int>(*v);
    if (j.contains("std")) {
        if (auto v = number("std")) c.stddev = Money::from_dollars_rounded(*v);
    }
    c.merchant_name = text_field(j, "merchant_name", issues, true);
    c.product_description = text_field(j, "product_description", issues, false);
    return c;
}

std::vector<ScheduledCharge> charges_from_json(const json& parent, std::string_view key, std::vector<ValidationIssue>& issues) {
    std::vector<ScheduledCharge> out;
    auto it = parent.find(std::string(key));
    if (it == parent.end() || it->is_null()) return out;
    if (!it->is_array()) {
        issues.push_back({std::string(key), "must be an array"});
        return out;
    }
    for (std::size_t i = 0; i < it->size(); ++i)
        out.push_back(charge_from_json((*it)[i], fmt::format("{}[{}]", key, i), issues));
    return out;
}

AugmentedPersona augmented_from_json(const json& record, std::vector<ValidationIssue>& issues) {
    AugmentedPersona p;
    if (auto it = record.find("user_id"); it != record.end() && it->is_string()) p.user_id = it->get<std::string>();
    const json* persona = persona_block(record);
    if (persona == nullptr) {
        issues.push_back({"user_persona", "missing"});
    } else {
        p.user_persona = persona_from_json(*persona, issues);
    }
    auto prof = record.find("user_financial_profile");
    if (prof == record.end() || !prof->is_object()) {
        issues.push_back({"user_financial_profile", "missing"});
        return p;
    }
    p.user_financial_profile = profile_from_json(*prof, issues);
    // Schedules may also sit beside the profile rather than inside it.
    if (!prof->contains("subscriptions"))
        p.user_financial_profile.subscriptions = charges_from_json(record, "subscriptions", issues);
    if (!prof->contains("recurring_variable_bills"))
        p.user_financial_profile.recurring_variable_bills = charges_from_json(record, "recurring_variable_bills", issues);
    return p;
}

}  // namespace

std::string_view to_string(IncomeLevel level) {
    switch (level) {
        case IncomeLevel::low: return "low income";
        case IncomeLevel::med: return "med income";
        case IncomeLevel::high: return "high income";
    }
    return "med income";
}

std::string_view to_string(PaymentHabit habit) {
    switch (habit) {
        case PaymentHabit::automatic_payment: return "automatic_payment";
        case PaymentHabit::manual_on_due_date: return "manual_on_due_date";
        case PaymentHabit::irregular: return "irregular";
    }
    return "automatic_payment";
}

std::string_view to_string(Archetype archetype) {
    switch (archetype) {
        case Archetype::survivor: return "survivor";
        case Archetype::saver: return "saver";
        case Archetype::balancer: return "balancer";
        case Archetype::enjoyer: return "enjoyer";
        case Archetype::spender: return "spender";
    }
    return "balancer";
}

std::string_view to_string(Sex sex) { return sex == Sex::male ? "Male" : "Female"; }

std::optional<IncomeLevel> parse_income_level(std::string_view text) {
    auto t = lower(trim(text));
    if (t.rfind("low", 0) == 0) return IncomeLevel::low;
    if (t.rfind("med", 0) == 0 || t.rfind("middle", 0) == 0) return IncomeLevel::med;
    if (t.rfind("high", 0) == 0) return IncomeLevel::high;
    return std::nullopt;
}

std::optional<PaymentHabit> parse_payment_habit(std::string_view text) {
    auto t = lower(trim(text));
    if (t == "automatic_payment" || t == "automatic" || t == "autopay") return PaymentHabit::automatic_payment;
    if (t == "manual_on_due_date" || t == "manual") return PaymentHabit::manual_on_due_date;
    if (t == "irregular") return PaymentHabit::irregular;
    return std::nullopt;
}

std::optional<Archetype> parse_archetype(std::string_view spending_patterns) {
    auto t = lower(trim(spending_patterns));
    auto colon = t.find(':');
    std::string head = trim(t.substr(0, colon));
    if (!head.empty() && head.back() == 's') head.pop_back();
    for (int i = 0; i < kArchetypeCount; ++i) {
        auto a = static_cast<Archetype>(i);
        if (head == to_string(a)) return a;
    }
    return std::nullopt;
}

std::string archetype_description(Archetype archetype) {
    switch (archetype) {
        case Archetype::survivor:
            return "Survivors: cover essentials first and have little room for discretionary spending.";
        case Archetype::saver:
            return "Savers: put away a fixed share of every paycheck and rarely splurge.";
        case Archetype::balancer:
            return "Balancers: intentionally prioritize saving and investing for the future while still maintaining a "
                   "comfortable current lifestyle.";
        case Archetype::enjoyer:
            return "Enjoyers: spend comfortably on leisure and food while keeping up with bills.";
        case Archetype::spender:
            return "Spenders: enjoy premium experiences and spend freely on lifestyle.";
    }
    return {};
}

std::optional<Archetype> FinancialProfile::archetype() const { return parse_archetype(spending_patterns); }

bool FinancialProfile::owns_car() const {
    auto t = lower(car_ownership);
    return t.rfind("owns", 0) == 0 && t != "owns_0_cars";
}

std::optional<std::vector<std::string>> parse_string_list(const json& value) {
    std::vector<std::string> out;
    if (value.is_array()) {
        for (const auto& item : value) {
            if (!item.is_string()) return std::nullopt;
            out.push_back(item.get<std::string>());
        }
        return out;
    }
    if (!value.is_string()) return std::nullopt;
    std::string_view s = value.get_ref<const std::string&>();
    auto t = trim(s);
    std::string_view v = t;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') return std::nullopt;
    v = v.substr(1, v.size() - 2);
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < v.size() && std::isspace(static_cast<unsigned char>(v[i]))) ++i;
    };
    skip_ws();
    while (i < v.size()) {
        char quote = v[i];
        if (quote != '\'' && quote != '"') return std::nullopt;
        ++i;
        std::string item;
        bool closed = false;
        while (i < v.size()) {
            char c = v[i++];
            if (c == '\\' && i < v.size()) {
                item.push_back(v[i++]);
                continue;
            }
            if (c == quote) {
                closed = true;
                break;
            }
            item.push_back(c);
        }
        if (!closed) return std::nullopt;
        out.push_back(std::move(item));
        skip_ws();
        if (i < v.size()) {
            if (v[i] != ',') return std::nullopt;
            ++i;
            skip_ws();
        }
    }
    return out;
}

std::string format_string_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        const auto& item = items[i];
        bool has_single = item.find('\'') != std::string::npos;
        bool has_double = item.find('"') != std::string::npos;
        char quote = (has_single && !has_double) ? '"' : '\'';
        out.push_back(quote);
        for (char c : item) {
            if (c == quote || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back(quote);
    }
    out += "]";
    return out;
}

Persona persona_from_json(const json& j, std::vector<ValidationIssue>& issues) {
    Persona p;
    p.persona = text_field(j, "persona", issues, true);
    p.professional_persona = text_field(j, "professional_persona", issues, true);
    p.sports_persona = text_field(j, "sports_persona", issues, true);
    p.arts_persona = text_field(j, "arts_persona", issues, true);
    p.travel_persona = text_field(j, "travel_persona", issues, true);
    p.culinary_persona = text_field(j, "culinary_persona", issues, true);
    p.career_goals_and_ambitions = text_field(j, "career_goals_and_ambitions", issues, true);
    for (auto [key, target] : {std::pair{"skills_and_expertise_list", &p.skills_and_expertise_list},
                               std::pair{"hobbies_and_interests_list", &p.hobbies_and_interests_list}}) {
        auto it = j.find(key);
        if (it == j.end()) {
            issues.push_back({key, "missing"});
            continue;
        }
        auto list = parse_string_list(*it);
        if (!list)
            issues.push_back({key, "must be a list of strings"});
        else
            *target = std::move(*list);
    }
    auto sex = text_field(j, "sex", issues, true);
    if (sex == "Male" || sex == "male")
        p.sex = Sex::male;
    else if (sex == "Female" || sex == "female")
        p.sex = Sex::female;
    else if (!sex.empty())
        issues.push_back({"sex", "must be Male or Female"});

    if (auto it = j.find("age"); it == j.end() || it->is_null()) {
        issues.push_back({"age", "missing"});
    } else if (it->is_number_integer()) {
        p.age = it->get<int>();
    } else if (it->is_string()) {
        const auto& s = it->get_ref<const std::string&>();
        try {
            std::size_t used = 0;
            p.age = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            issues.push_back({"age", "must be an integer"});
        }
    } else {
        issues.push_back({"age", "must be an integer"});
    }
    p.marital_status = text_field(j, "marital_status", issues, true);
    p.education_level = text_field(j, "education_level", issues, true);
    p.occupation = text_field(j, "occupation", issues, true);
    if (auto it = j.find("bachelors_field"); it != j.end() && !it->is_null()) {
        if (it->is_string())
            p.bachelors_field = it->get<std::string>();
        else
            issues.push_back({"bachelors_field", "must be a string or null"});
    }
    return p;
}

FinancialProfile profile_from_json(const json& j, std::vector<ValidationIssue>& issues) {
    FinancialProfile f;
    auto income = text_field(j, "income_level", issues, true);
    if (auto level = parse_income_level(income))
        f.income_level = *level;
    else if (!income.empty())
        issues.push_back({"income_level", "must be low, med or high income"});

    if (auto it = j.find("credit_limit"); it == j.end() || !it->is_number()) {
        issues.push_back({"credit_limit", "must be a number"});
    } else {
        f.credit_limit = Money::from_dollars_rounded(it->get<double>());
    }
    auto habit = text_field(j, "payment_habit", issues, true);
    if (auto h = parse_payment_habit(habit))
        f.payment_habit = *h;
    else if (!habit.empty())
        issues.push_back({"payment_habit", "must be automatic_payment, manual_on_due_date or irregular"});
    f.car_ownership = text_field(j, "car_ownership", issues, true);
    f.spending_patterns = text_field(j, "spending_patterns", issues, true);
    f.subscriptions = charges_from_json(j, "subscriptions", issues);
    f.recurring_variable_bills = charges_from_json(j, "recurring_variable_bills", issues);
    return f;
}

std::vector<ValidationIssue> validate_persona(const Persona& p) {
    std::vector<ValidationIssue> issues;
    if (p.age < 18 || p.age > 110) issues.push_back({"age", "age out of range"});
    for (auto [field, value] : {std::pair<std::string_view, const std::string*>{"marital_status", &p.marital_status},
                                {"education_level", &p.education_level},
                                {"occupation", &p.occupation}}) {
        if (trim(*value).empty()) issues.push_back({std::string(field), "must be non-empty"});
    }
    if (p.skills_and_expertise_list.empty())
        issues.push_back({"skills_and_expertise_list", "must be a non-empty list"});
    if (p.hobbies_and_interests_list.empty())
        issues.push_back({"hobbies_and_interests_list", "must be a non-empty list"});
    for (const auto& item : p.hobbies_and_interests_list)
        if (trim(item).empty()) issues.push_back({"hobbies_and_interests_list", "items must be non-empty"});
    return issues;
}

namespace {

void validate_charges(const std::vector<ScheduledCharge>& charges, std::string_view list, bool fixed,
                      std::vector<ValidationIssue>& issues) {
    if (charges.size() > 12) issues.push_back({std::string(list), "at most 12 items"});
    for (std::size_t i = 0; i < charges.size(); ++i) {
        const auto& c = charges[i];
        auto field = fmt::format("{}[{}]", list, i);
        if (c.date_to_charge < 1 || c.date_to_charge > 31)
            issues.push_back({field + ".date_to_charge", "date_to_charge must be in [1,31]"});
        if (!c.amount.is_positive()) issues.push_back({field + ".amount", "amount must be positive"});
        if (c.charge_frequency_month < 1)
            issues.push_back({field + ".charge_frequency_month", "charge_frequency_month must be positive"});
        if (c.stddev.is_negative()) issues.push_back({field + ".std", "std must be non-negative"});
        if (fixed && !c.stddev.is_zero()) issues.push_back({field + ".std", "subscription std must be 0"});
        if (trim(c.merchant_name).empty()) issues.push_back({field + ".merchant_name", "must be non-empty"});
    }
}

}  // namespace

std::vector<ValidationIssue> validate_profile(const FinancialProfile& f) {
    std::vector<ValidationIssue> issues;
    if (!f.credit_limit.is_positive()) issues.push_back({"credit_limit", "credit_limit must be positive"});
    if (trim(f.car_ownership).empty()) issues.push_back({"car_ownership", "must be non-empty"});
    if (!f.archetype())
        issues.push_back({"spending_patterns", "must name one of survivor, saver, balancer, enjoyer, spender"});
    validate_charges(f.subscriptions, "subscriptions", true, issues);
    validate_charges(f.recurring_variable_bills, "recurring_variable_bills", false, issues);
    return issues;
}

std::vector<ValidationIssue> validate_augmented_persona(const AugmentedPersona& p) {
    auto issues = validate_persona(p.user_persona);
    auto more = validate_profile(p.user_financial_profile);
    issues.insert(issues.end(), more.begin(), more.end());
    return issues;
}

ordered_json to_json(const Persona& p) {
    ordered_json j;
    j["persona"] = p.persona;
    j["professional_persona"] = p.professional_persona;
    j["sports_persona"] = p.sports_persona;
    j["arts_persona"] = p.arts_persona;
    j["travel_persona"] = p.travel_persona;
    j["culinary_persona"] = p.culinary_persona;
    j["skills_and_expertise_list"] = format_string_list(p.skills_and_expertise_list);
    j["hobbies_and_interests_list"] = format_string_list(p.hobbies_and_interests_list);
    j["career_goals_and_ambitions"] = p.career_goals_and_ambitions;
    j["sex"] = to_string(p.sex);
    j["age"] = std::to_string(p.age);
    j["marital_status"] = p.marital_status;
    j["education_level"] = p.education_level;
    j["bachelors_field"] = p.bachelors_field ? ordered_json(*p.bachelors_field) : ordered_json(nullptr);
    j["occupation"] = p.occupation;
    return j;
}

ordered_json to_json(const ScheduledCharge& c) {
    ordered_json j;
    j["date_to_charge"] = c.date_to_charge;
    j["amount"] = c.amount.dollars();
    j["charge_frequency_month"] = c.charge_frequency_month;
    j["std"] = c.stddev.dollars();
    j["merchant_name"] = c.merchant_name;
    j["product_description"] = c.product_description;
    return j;
}

ordered_json to_json(const FinancialProfile& f) {
    ordered_json j;
    j["income_level"] = to_string(f.income_level);
    // Whole dollars when exact, as in the source schema.
    if (f.credit_limit.cents() % 100 == 0)
        j["credit_limit"] = f.credit_limit.cents() / 100;
    else
        j["credit_limit"] = f.credit_limit.dollars();
    j["payment_habit"] = to_string(f.payment_habit);
    j["car_ownership"] = f.car_ownership;
    j["spending_patterns"] = f.spending_patterns;
    j["subscriptions"] = ordered_json::array();
    for (const auto& c : f.subscriptions) j["subscriptions"].push_back(to_json(c));
    j["recurring_variable_bills"] = ordered_json::array();
    for (const auto& c : f.recurring_variable_bills) j["recurring_variable_bills"].push_back(to_json(c));
    return j;
}

ordered_json to_json(const AugmentedPersona& p) {
    ordered_json j;
    j["user_id"] = p.user_id;
    j["user_persona"] = to_json(p.user_persona);
    j["user_financial_profile"] = to_json(p.user_financial_profile);
    return j;
}

std::string serialize_persona_line(const AugmentedPersona& p) { return to_json(p).dump(); }

PersonaLoadError::PersonaLoadError(std::vector<RecordError> errors)
    : PersonaLoadError("", std::move(errors)) {}

PersonaLoadError::PersonaLoadError(const std::string& message, std::vector<RecordError> errors)
    : std::runtime_error([&] {
          if (!message.empty()) return message;
          std::string m = "invalid persona records:";
          for (const auto& e : errors)
              for (const auto& issue : e.issues) m += fmt::format("\n  line {}: {}: {}", e.line, issue.field, issue.rule);
          return m;
      }()),
      errors_(std::move(errors)) {}

std::string derive_user_id(std::size_t index, const Persona& persona) {
    auto digest = fnv1a64(to_json(persona).dump());
    return fmt::format("u{:06}-{:08x}", index, static_cast<std::uint32_t>(digest >> 32));
}

std::vector<AugmentedPersona> parse_personas(std::string_view text) {
    std::vector<RecordError> errors;
    auto records = split_records(text, errors);
    std::vector<AugmentedPersona> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& [line, record] = records[i];
        std::vector<ValidationIssue> issues;
        auto p = augmented_from_json(record, issues);
        if (issues.empty()) issues = validate_augmented_persona(p);
        if (!issues.empty()) {
            errors.push_back({line, std::move(issues)});
            continue;
        }
        if (p.user_id.empty()) p.user_id = derive_user_id(i, p.user_persona);
        if (!seen.insert(p.user_id).second)
            throw PersonaLoadError(fmt::format("line {}: duplicate user_id '{}'", line, p.user_id), {});
        out.push_back(std::move(p));
    }
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
        throw PersonaLoadError(std::move(errors));
    }
    return out;
}

std::vector<AugmentedPersona> load_personas(const std::filesystem::path& path) { return parse_personas(read_file(path)); }

std::vector<PersonaRecord> parse_persona_records(std::string_view text) {
    std::vector<RecordError> errors;
    auto records = split_records(text, errors);
    std::vector<PersonaRecord> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& [line, record] = records[i];
        std::vector<ValidationIssue> issues;
        const json* block = persona_block(record);
        PersonaRecord r;
        if (block == nullptr)
            issues.push_back({"user_persona", "missing"});
        else
            r.persona = persona_from_json(*block, issues);
        if (issues.empty()) issues = validate_persona(r.persona);
        if (!issues.empty()) {
            errors.push_back({line, std::move(issues)});
            continue;
        }
        if (auto it = record.find("user_id"); it != record.end() && it->is_string()) r.user_id = it->get<std::string>();
        if (r.user_id.empty()) r.user_id = derive_user_id(i, r.persona);
        if (!seen.insert(r.user_id).second)
            throw PersonaLoadError(fmt::format("line {}: duplicate user_id '{}'", line, r.user_id), {});
        out.push_back(std::move(r));
    }
    if (!errors.empty()) throw PersonaLoadError(std::move(errors));
    return out;
}

std::vector<PersonaRecord> load_persona_records(const std::filesystem::path& path) {
    return parse_persona_records(read_file(path));
}

void write_personas(const std::filesystem::path& path, const std::vector<AugmentedPersona>& personas) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    for (const auto& p : personas) out << serialize_persona_line(p) << '\n';
}

}  // namespace ledgerloop
