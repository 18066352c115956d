#include "ledgerloop/profile.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <fmt/format.h>

#include "ledgerloop/rng.hpp"

namespace ledgerloop {

namespace data {
extern const std::string_view profile_examples_json;
}

namespace {

using L = IncomeLevel;

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

const std::map<std::string, std::vector<IncomeLevel>, std::less<>>& occupation_table() {
    static const std::map<std::string, std::vector<IncomeLevel>, std::less<>> table = {
        {"physician", {L::high}},
        {"lawyer", {L::high}},
        {"software_developer", {L::med, L::high}},
        {"general_manager", {L::med, L::high}},
        {"mechanical_engineer", {L::med, L::high}},
        {"accountant", {L::med}},
        {"registered_nurse", {L::med}},
        {"electrician", {L::med}},
        {"graphic_designer", {L::med}},
        {"elementary_school_teacher", {L::med}},
        {"truck_driver", {L::med}},
        {"construction_laborer", {L::low, L::med}},
        {"customer_service_representative", {L::low, L::med}},
        {"retail_salesperson", {L::low, L::med}},
        {"home_health_aide", {L::low, L::med}},
        {"cashier", {L::low}},
        {"waiter", {L::low}},
        {"janitor", {L::low}},
        {"student", {L::low}},
    };
    return table;
}

/// Education alone, used for people outside the workforce and unknown occupations.
std::vector<IncomeLevel> by_education(std::string_view education) {
    if (education == "less_than_9th" || education == "9th_12th_no_diploma") return {L::low};
    if (education == "high_school" || education == "some_college" || education == "associates") return {L::low, L::med};
    if (education == "bachelors") return {L::med};
    if (education == "graduate") return {L::med, L::high};
    return {L::low, L::med};
}

struct Range {
    std::int64_t lo_dollars;
    std::int64_t hi_dollars;
};

Range credit_range(IncomeLevel level) {
    switch (level) {
        case L::low: return {1000, 5000};
        case L::med: return {5000, 15000};
        case L::high: return {15000, 40000};
    }
    return {5000, 15000};
}

PaymentHabit draw_habit(IncomeLevel level, Rng& rng) {
    // (automatic, manual) cumulative thresholds; remainder is irregular.
    double a = 0.5, m = 0.85;
    if (level == L::low) a = 0.35, m = 0.70;
    if (level == L::high) a = 0.60, m = 0.92;
    double u = rng.uniform();
    if (u < a) return PaymentHabit::automatic_payment;
    if (u < m) return PaymentHabit::manual_on_due_date;
    return PaymentHabit::irregular;
}

bool mentions_transit(const Persona& p) {
    static const std::vector<std::string_view> cues = {
        "public transit", "subway", "takes the bus", "rides the bus", "by bus", "commutes by train",
        "does not drive", "doesn't drive", "bikes to work", "car-free", "without a car"};
    for (const auto* field : {&p.persona, &p.professional_persona, &p.sports_persona, &p.travel_persona}) {
        auto t = lower(*field);
        for (auto cue : cues)
            if (t.find(cue) != std::string::npos) return true;
    }
    return false;
}

std::string draw_car(const Persona& p, Rng& rng) {
    if (mentions_transit(p)) return "no_car";
    if (p.occupation == "student" && rng.bernoulli(0.5)) return "no_car";
    if (lower(p.marital_status).rfind("married", 0) == 0 && rng.bernoulli(0.4)) return "owns_2_cars";
    return "owns_1_car";
}

int charge_day(Rng& rng) { return static_cast<int>(rng.uniform_int(1, 28)); }

std::vector<ScheduledCharge> draw_subscriptions(const Persona& p, const Catalog& catalog, Rng& rng) {
    const auto count = static_cast<std::size_t>(rng.uniform_int(3, 5));
    const auto tags = catalog.tags_for(p);
    std::vector<const CatalogSubscription*> picked;
    auto chosen = [&](const CatalogSubscription* s) { return std::find(picked.begin(), picked.end(), s) != picked.end(); };

    // Round-robin over hobby tags so every hobby gets its first match before any gets a second.
    const std::size_t tagged_cap = count - 1;
    for (bool progress = true; progress && picked.size() < tagged_cap;) {
        progress = false;
        for (const auto& tag : tags) {
            if (picked.size() >= tagged_cap) break;
            for (const auto& s : catalog.subscriptions()) {
                if (chosen(&s) || std::find(s.tags.begin(), s.tags.end(), tag) == s.tags.end()) continue;
                picked.push_back(&s);
                progress = true;
                break;
            }
        }
    }
    std::vector<const CatalogSubscription*> generic;
    for (const auto& s : catalog.subscriptions())
        if (std::find(s.tags.begin(), s.tags.end(), "generic") != s.tags.end()) generic.push_back(&s);
    rng.shuffle(std::span(generic));
    for (const auto* s : generic) {
        if (picked.size() >= count) break;
        if (!chosen(s)) picked.push_back(s);
    }

    std::vector<ScheduledCharge> out;
    for (const auto* s : picked)
        out.push_back({charge_day(rng), s->amount, s->charge_frequency_month, Money{}, s->merchant_name,
                       s->product_description});
    return out;
}

ScheduledCharge bill_from(const CatalogBill& b, Rng& rng) {
    double scale = 0.85 + 0.3 * rng.uniform();
    auto amount = Money::from_cents(std::max<std::int64_t>(1, round_half_up(b.amount.cents() * scale)));
    auto sd = Money::from_cents(round_half_up(b.stddev.cents() * scale));
    return {charge_day(rng), amount, b.charge_frequency_month, sd, b.merchant_name, b.product_description};
}

std::vector<ScheduledCharge> draw_bills(const Persona& p, bool owns_car, const Catalog& catalog, Rng& rng) {
    const auto count = static_cast<std::size_t>(rng.uniform_int(4, 6));
    auto with_tag = [&](std::string_view tag) {
        std::vector<const CatalogBill*> out;
        for (const auto& b : catalog.bills())
            if (std::find(b.tags.begin(), b.tags.end(), tag) != b.tags.end()) out.push_back(&b);
        return out;
    };
    auto pick_one = [&](std::string_view tag) -> const CatalogBill* {
        auto items = with_tag(tag);
        if (items.empty()) return nullptr;
        return items[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))];
    };

    std::vector<const CatalogBill*> order = with_tag("core");
    if (owns_car)
        if (const auto* b = pick_one("car")) order.push_back(b);
    const bool homeowner = rng.bernoulli(p.age >= 40 ? 0.65 : 0.35);
    if (const auto* b = pick_one(homeowner ? "homeowner" : "renter")) order.push_back(b);
    for (const auto* b : with_tag("extra")) order.push_back(b);
    if (order.size() > count) order.resize(count);

    std::vector<ScheduledCharge> out;
    for (const auto* b : order) out.push_back(bill_from(*b, rng));
    return out;
}

const nlohmann::json& bundled_examples() {
    static const nlohmann::json examples = nlohmann::json::parse(data::profile_examples_json).at("examples");
    return examples;
}

}  // namespace

std::vector<IncomeLevel> permitted_income_levels(const std::string& education_level, const std::string& occupation) {
    const auto& table = occupation_table();
    if (auto it = table.find(occupation); it != table.end()) return it->second;
    return by_education(education_level);
}

FinancialProfile derive_profile_heuristic(const Persona& persona, std::uint64_t seed, const Catalog& catalog) {
    const auto content = fnv1a64(to_json(persona).dump());
    Rng rng = Rng::derive(seed, "profile", content);

    FinancialProfile f;
    auto levels = permitted_income_levels(persona.education_level, persona.occupation);
    f.income_level = levels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(levels.size()) - 1))];

    auto [lo, hi] = credit_range(f.income_level);
    auto steps = rng.uniform_int(0, (hi - lo) / 500);
    f.credit_limit = Money::from_dollars(lo + steps * 500);

    f.payment_habit = draw_habit(f.income_level, rng);
    f.car_ownership = draw_car(persona, rng);

    std::string text;
    for (const auto& h : persona.hobbies_and_interests_list) text += h + "\n";
    text += persona.career_goals_and_ambitions;
    auto archetype = static_cast<Archetype>(fnv1a64(text) % kArchetypeCount);
    f.spending_patterns = archetype_description(archetype);

    f.subscriptions = draw_subscriptions(persona, catalog, rng);
    f.recurring_variable_bills = draw_bills(persona, f.owns_car(), catalog, rng);
    return f;
}

std::vector<ChatMessage> profile_request_messages(const Persona& persona) {
    std::vector<ChatMessage> messages;
    messages.push_back(
        {"system",
         "You derive the financial status of a simulated credit-card holder from their persona. Reply with one JSON "
         "object with keys income_level (\"low income\", \"med income\" or \"high income\"), credit_limit (whole "
         "dollars), payment_habit (automatic_payment, manual_on_due_date or irregular), car_ownership, "
         "spending_patterns (one of Survivors, Savers, Balancers, Enjoyers, Spenders followed by a colon and a short "
         "description), subscriptions and recurring_variable_bills (lists of {date_to_charge, amount, "
         "charge_frequency_month, std, merchant_name, product_description}; std is 0 for subscriptions)."});
    for (const auto& ex : bundled_examples()) {
        messages.push_back({"user", ex.at("persona").dump()});
        messages.push_back({"assistant", ex.at("profile").dump()});
    }
    messages.push_back({"user", to_json(persona).dump()});
    return messages;
}

FinancialProfile derive_profile_external(const Persona& persona, ChatClient& client) {
    auto messages = profile_request_messages(persona);
    std::string raw;
    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            raw = client.complete(messages);
        } catch (const BackendError& e) {
            throw ProfileDerivationError(e.what(), e.raw());
        }
        auto j = nlohmann::json::parse(extract_json_object(raw), nullptr, false);
        std::vector<ValidationIssue> issues;
        if (j.is_discarded() || !j.is_object()) {
            problem = "response is not a JSON object";
        } else {
            auto profile = profile_from_json(j, issues);
            if (issues.empty()) issues = validate_profile(profile);
            if (issues.empty()) return profile;
            problem = fmt::format("{}: {}", issues.front().field, issues.front().rule);
        }
        messages.push_back({"assistant", raw});
        messages.push_back({"user", "That profile was rejected (" + problem + "). Reply with the corrected JSON object only."});
    }
    throw ProfileDerivationError("unusable profile after reprompt: " + problem, raw);
}

FinancialProfile derive_financial_profile(const Persona& persona, ProfileMode mode, std::uint64_t seed,
                                          ChatClient* client) {
    if (mode == ProfileMode::heuristic) return derive_profile_heuristic(persona, seed);
    if (client == nullptr) throw ProfileDerivationError("external mode needs a chat client", "");
    return derive_profile_external(persona, *client);
}

}  // namespace ledgerloop
