#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/money.hpp"

namespace ledgerloop {

enum class Sex { male, female };

/// The 15 persona fields of the source record. Together with the five
/// financial-status fields they form the 20-item augmented dictionary.
struct Persona {
    std::string persona;
    std::string professional_persona;
    std::string sports_persona;
    std::string arts_persona;
    std::string travel_persona;
    std::string culinary_persona;
    std::vector<std::string> skills_and_expertise_list;
    std::vector<std::string> hobbies_and_interests_list;
    std::string career_goals_and_ambitions;
    Sex sex = Sex::male;
    int age = 0;
    std::string marital_status;
    std::string education_level;
    std::optional<std::string> bachelors_field;
    std::string occupation;

    friend bool operator==(const Persona&, const Persona&) = default;
};

enum class IncomeLevel { low, med, high };
enum class PaymentHabit { automatic_payment, manual_on_due_date, irregular };
/// Spending archetypes, ordered from most frugal to highest spending.
enum class Archetype { survivor, saver, balancer, enjoyer, spender };
inline constexpr int kArchetypeCount = 5;

/// A fixed (subscription) or variable (recurring bill) monthly-cadence charge.
struct ScheduledCharge {
    int date_to_charge = 1;
    Money amount;
    int charge_frequency_month = 1;
    Money stddev;  // "std" in the schema; zero for subscriptions
    std::string merchant_name;
    std::string product_description;

    friend bool operator==(const ScheduledCharge&, const ScheduledCharge&) = default;
};

struct FinancialProfile {
    IncomeLevel income_level = IncomeLevel::med;
    Money credit_limit;
    PaymentHabit payment_habit = PaymentHabit::automatic_payment;
    std::string car_ownership;      // "no_car", "owns_1_car", "owns_2_cars", ...
    std::string spending_patterns;  // "<Archetype>s: description"
    std::vector<ScheduledCharge> subscriptions;
    std::vector<ScheduledCharge> recurring_variable_bills;

    /// Archetype named by the prefix of spending_patterns, if recognised.
    std::optional<Archetype> archetype() const;
    bool owns_car() const;

    friend bool operator==(const FinancialProfile&, const FinancialProfile&) = default;
};

struct AugmentedPersona {
    std::string user_id;
    Persona user_persona;
    FinancialProfile user_financial_profile;

    friend bool operator==(const AugmentedPersona&, const AugmentedPersona&) = default;
};

struct ValidationIssue {
    std::string field;
    std::string rule;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

std::string_view to_string(IncomeLevel level);       // "low income" / "med income" / "high income"
std::string_view to_string(PaymentHabit habit);
std::string_view to_string(Archetype archetype);     // "survivor" ...
std::string_view to_string(Sex sex);
std::optional<IncomeLevel> parse_income_level(std::string_view text);
std::optional<PaymentHabit> parse_payment_habit(std::string_view text);
std::optional<Archetype> parse_archetype(std::string_view spending_patterns);
/// Canonical "<Name>s: description" text for an archetype.
std::string archetype_description(Archetype archetype);

/// Parses "['a', 'b']" (the source dataset's stringified lists) or a JSON array.
std::optional<std::vector<std::string>> parse_string_list(const nlohmann::json& value);
/// Python-repr style list rendering, inverse of parse_string_list.
std::string format_string_list(const std::vector<std::string>& items);

std::vector<ValidationIssue> validate_persona(const Persona& persona);
std::vector<ValidationIssue> validate_profile(const FinancialProfile& profile);
std::vector<ValidationIssue> validate_augmented_persona(const AugmentedPersona& p);

/// Lenient field-by-field parsing: every problem becomes an issue rather than an exception.
Persona persona_from_json(const nlohmann::json& j, std::vector<ValidationIssue>& issues);
FinancialProfile profile_from_json(const nlohmann::json& j, std::vector<ValidationIssue>& issues);

nlohmann::ordered_json to_json(const Persona& persona);
nlohmann::ordered_json to_json(const FinancialProfile& profile);
nlohmann::ordered_json to_json(const ScheduledCharge& charge);
nlohmann::ordered_json to_json(const AugmentedPersona& p);
/// One canonical JSONL line (no trailing newline).
std::string serialize_persona_line(const AugmentedPersona& p);

struct RecordError {
    std::size_t line = 0;  // 1-based line (JSONL) or element index (array)
    std::vector<ValidationIssue> issues;
};

class PersonaLoadError : public std::runtime_error {
public:
    explicit PersonaLoadError(std::vector<RecordError> errors);
    PersonaLoadError(const std::string& message, std::vector<RecordError> errors);
    const std::vector<RecordError>& errors() const { return errors_; }

private:
    std::vector<RecordError> errors_;
};

/// Loads augmented personas from JSONL, a JSON array, or a single JSON object.
/// Throws PersonaLoadError listing every invalid record, or on a duplicate user_id.
std::vector<AugmentedPersona> load_personas(const std::filesystem::path& path);
std::vector<AugmentedPersona> parse_personas(std::string_view text);

/// Persona-only records (financial profile absent or ignored), for profile derivation.
struct PersonaRecord {
    std::string user_id;
    Persona persona;
};
std::vector<PersonaRecord> load_persona_records(const std::filesystem::path& path);
std::vector<PersonaRecord> parse_persona_records(std::string_view text);

/// Deterministic id from record position and persona content.
std::string derive_user_id(std::size_t index, const Persona& persona);

void write_personas(const std::filesystem::path& path, const std::vector<AugmentedPersona>& personas);

}  // namespace ledgerloop
