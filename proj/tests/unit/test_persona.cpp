#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "ledgerloop/persona.hpp"

using namespace ledgerloop;
using ledgerloop::test::reference_persona;

namespace {

bool has_issue(const std::vector<ValidationIssue>& issues, const std::string& rule) {
    for (const auto& i : issues)
        if (i.rule == rule) return true;
    return false;
}

nlohmann::json reference_json() {
    std::ifstream in(test::data_dir() / "reference_persona.json");
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("worked example record parses with five subscriptions and five bills") {
    auto p = reference_persona();
    CHECK(p.user_persona.age == 72);
    CHECK(p.user_financial_profile.credit_limit == Money::from_dollars(9500));
    CHECK(p.user_financial_profile.subscriptions.size() == 5);
    CHECK(p.user_financial_profile.recurring_variable_bills.size() == 5);
    CHECK(p.user_financial_profile.income_level == IncomeLevel::med);
    CHECK(p.user_financial_profile.archetype() == Archetype::balancer);
    CHECK(p.user_financial_profile.owns_car());
    CHECK(p.user_persona.hobbies_and_interests_list.front() == "golfing");
    CHECK(validate_augmented_persona(p).empty());
}

TEST_CASE("empty input gives an empty list") {
    CHECK(parse_personas("").empty());
    CHECK(parse_personas("\n\n").empty());
}

TEST_CASE("age 17 is out of range") {
    auto j = reference_json();
    j["user_persona"]["age"] = "17";
    try {
        parse_personas(j.dump());
        FAIL("expected PersonaLoadError");
    } catch (const PersonaLoadError& e) {
        REQUIRE(e.errors().size() == 1);
        CHECK(e.errors()[0].line == 1);
        CHECK(has_issue(e.errors()[0].issues, "age out of range"));
    }
}

TEST_CASE("profile validation") {
    auto p = reference_persona();
    SUBCASE("credit limit must be positive") {
        p.user_financial_profile.credit_limit = Money{};
        CHECK(has_issue(validate_augmented_persona(p), "credit_limit must be positive"));
    }
    SUBCASE("subscriptions carry no deviation") {
        p.user_financial_profile.subscriptions[0].stddev = Money::from_dollars(5);
        CHECK(has_issue(validate_augmented_persona(p), "subscription std must be 0"));
    }
    SUBCASE("bills may deviate") {
        p.user_financial_profile.recurring_variable_bills[0].stddev = Money::from_dollars(5);
        CHECK(validate_augmented_persona(p).empty());
    }
    SUBCASE("unknown archetype") {
        p.user_financial_profile.spending_patterns = "Gamblers: bet it all";
        CHECK_FALSE(validate_augmented_persona(p).empty());
    }
}

TEST_CASE("invalid records are all reported with their line numbers") {
    auto good = reference_json();
    auto bad = good;
    bad["user_id"] = "other";
    bad["user_financial_profile"]["credit_limit"] = -1;
    auto text = good.dump() + "\n" + bad.dump() + "\n{not json\n";
    try {
        parse_personas(text);
        FAIL("expected PersonaLoadError");
    } catch (const PersonaLoadError& e) {
        REQUIRE(e.errors().size() == 2);
        CHECK(e.errors()[0].line == 2);
        CHECK(e.errors()[1].line == 3);
    }
}

TEST_CASE("duplicate user ids are a hard error") {
    auto j = reference_json();
    CHECK_THROWS_AS(parse_personas(j.dump() + "\n" + j.dump()), PersonaLoadError);
}

TEST_CASE("JSON array input and missing ids") {
    auto a = reference_json();
    a.erase("user_id");
    auto b = a;
    b["user_persona"]["age"] = 40;
    nlohmann::json arr = nlohmann::json::array({a, b});
    auto personas = parse_personas(arr.dump());
    REQUIRE(personas.size() == 2);
    CHECK(personas[0].user_id != personas[1].user_id);
    CHECK(personas[0].user_id == derive_user_id(0, personas[0].user_persona));
}

TEST_CASE("stringified lists") {
    auto list = parse_string_list(nlohmann::json("['golfing', 'coin collecting', \"d'oh\"]"));
    REQUIRE(list.has_value());
    CHECK(*list == std::vector<std::string>{"golfing", "coin collecting", "d'oh"});
    CHECK(parse_string_list(nlohmann::json::array({"a", "b"})) == std::vector<std::string>{"a", "b"});
    CHECK_FALSE(parse_string_list(nlohmann::json(5)).has_value());
    std::vector<std::string> items{"a", "b c"};
    CHECK(parse_string_list(nlohmann::json(format_string_list(items))) == items);
}

TEST_CASE("serialization round trip") {
    auto p = reference_persona();
    auto line = serialize_persona_line(p);
    auto back = parse_personas(line);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == p);
    CHECK(serialize_persona_line(back[0]) == line);
}

TEST_CASE("enum text forms") {
    CHECK(to_string(IncomeLevel::med) == "med income");
    CHECK(parse_income_level("high income") == IncomeLevel::high);
    CHECK(parse_payment_habit("manual_on_due_date") == PaymentHabit::manual_on_due_date);
    for (int a = 0; a < kArchetypeCount; ++a) {
        auto arch = static_cast<Archetype>(a);
        CHECK(parse_archetype(archetype_description(arch)) == arch);
    }
}
