#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "ledgerloop/profile.hpp"

using namespace ledgerloop;

TEST_CASE("heuristic derivation for the worked example persona") {
    auto persona = test::reference_persona().user_persona;
    auto profile = derive_financial_profile(persona, ProfileMode::heuristic, 42);
    CHECK(validate_profile(profile).empty());
    CHECK(profile.car_ownership == "owns_1_car");
    const auto& catalog = Catalog::builtin();
    bool golf = false;
    for (const auto& s : profile.subscriptions)
        for (const auto& cs : catalog.subscriptions())
            if (cs.merchant_name == s.merchant_name && std::count(cs.tags.begin(), cs.tags.end(), "golf") > 0) golf = true;
    CHECK(golf);
}

TEST_CASE("income lookup allows med income for retirees with a high school diploma") {
    auto levels = permitted_income_levels("high_school", "not_in_workforce");
    CHECK(std::find(levels.begin(), levels.end(), IncomeLevel::med) != levels.end());
    auto profile = derive_profile_heuristic(test::reference_persona().user_persona, 1);
    CHECK(std::find(levels.begin(), levels.end(), profile.income_level) != levels.end());
    CHECK_FALSE(permitted_income_levels("unknown", "unknown").empty());
}

TEST_CASE("derivation is a pure function of persona and seed") {
    auto persona = test::reference_persona().user_persona;
    CHECK(derive_profile_heuristic(persona, 7) == derive_profile_heuristic(persona, 7));
    for (const auto& p : test::sample_personas(20)) {
        auto a = derive_profile_heuristic(p.user_persona, 3);
        CHECK(a == derive_profile_heuristic(p.user_persona, 3));
        CHECK(validate_profile(a).empty());
        CHECK(a.subscriptions.size() >= 3);
        CHECK(a.subscriptions.size() <= 5);
        CHECK(a.recurring_variable_bills.size() >= 4);
        CHECK(a.recurring_variable_bills.size() <= 6);
    }
}

TEST_CASE("external derivation accepts a valid reply") {
    auto expected = test::reference_persona().user_financial_profile;
    test::ScriptedClient client({"Here you go:\n```json\n" + to_json(expected).dump() + "\n```"});
    auto profile = derive_financial_profile(test::reference_persona().user_persona, ProfileMode::external, 0, &client);
    CHECK(profile == expected);
    REQUIRE(client.requests.size() == 1);
    CHECK(client.requests[0].front().role == "system");
    CHECK(client.requests[0].back().role == "user");
}

TEST_CASE("external derivation reprompts once, then fails with the raw reply") {
    auto persona = test::reference_persona().user_persona;
    test::ScriptedClient client({"not json", "still not json"});
    try {
        derive_profile_external(persona, client);
        FAIL("expected ProfileDerivationError");
    } catch (const ProfileDerivationError& e) {
        CHECK(e.raw_response() == "still not json");
    }
    CHECK(client.requests.size() == 2);

    auto good = test::reference_persona().user_financial_profile;
    test::ScriptedClient second({"{}", to_json(good).dump()});
    CHECK(derive_profile_external(persona, second) == good);
}

TEST_CASE("unreachable backend surfaces as a derivation error") {
    test::ScriptedClient client({});
    CHECK_THROWS_AS(derive_profile_external(test::reference_persona().user_persona, client), ProfileDerivationError);
    CHECK_THROWS_AS(derive_financial_profile(test::reference_persona().user_persona, ProfileMode::external, 0, nullptr),
                    ProfileDerivationError);
}
