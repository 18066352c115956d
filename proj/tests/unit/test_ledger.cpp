#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "ledgerloop/config.hpp"
#include "ledgerloop/ledger.hpp"
#include "ledgerloop/rng.hpp"
#include "oracles.hpp"

using namespace ledgerloop;
using test::cents;
using test::day;

namespace {

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

}  // namespace

TEST_CASE("init_state") {
    EngineConfig config;
    auto profile = test::reference_persona().user_financial_profile;
    auto s = init_state(profile, day(2024, 1, 1), config);
    CHECK(s.credit_limit.cents() == 950000);
    CHECK(s.credit_balance.is_zero());
    CHECK(s.cash.cents() == 260000);
    CHECK(s.next_income_date == day(2024, 1, 1));
    CHECK(s.subscriptions.size() == 5);
    CHECK(s.bills.size() == 5);
    CHECK_FALSE(s.due_date.has_value());
    CHECK(s.owns_car);
    auto netflix = std::find_if(s.subscriptions.begin(), s.subscriptions.end(),
                                [](const ScheduleEntry& e) { return e.charge.merchant_name == "Netflix"; });
    REQUIRE(netflix != s.subscriptions.end());
    CHECK(netflix->next_date == day(2024, 1, 25));

    config.starting_cash_multiple = 0.5;
    CHECK(init_state(profile, day(2024, 1, 1), config).cash.cents() == 130000);
}

TEST_CASE("payments move cash and balance together") {
    auto s = test::make_state(cents(100000), cents(50000), cents(950000), day(2024, 3, 4));
    auto next = apply_event(s, test::payment(day(2024, 3, 4), cents(20000)));
    CHECK(next.cash.cents() == 80000);
    CHECK(next.credit_balance.cents() == 30000);
    CHECK(next.day.payment.cents() == 20000);
    CHECK(s.cash.cents() == 100000);
}

TEST_CASE("a purchase raises the balance") {
    auto s = test::make_state(cents(0), cents(0), cents(950000), day(2024, 1, 25));
    auto next = apply_event(s, test::purchase(day(2024, 1, 25), cents(1549), "Netflix", "Streaming Service"));
    CHECK(next.credit_balance.cents() == 1549);
    CHECK(next.cash.cents() == 0);
    CHECK(next.next_seq == 2);
}

TEST_CASE("check_event codes") {
    const Date d = day(2024, 5, 1);
    SUBCASE("overpayment") {
        auto s = test::make_state(cents(100000), cents(5000), cents(950000), d);
        auto vs = check_event(s, test::payment(d, cents(6000)));
        CHECK(has_code(vs, "OVERPAYMENT"));
        CHECK_THROWS_AS(apply_event(s, test::payment(d, cents(6000))), ContractViolation);
    }
    SUBCASE("limit") {
        auto s = test::make_state(cents(0), cents(949900), cents(950000), d);
        CHECK(has_code(check_event(s, test::purchase(d, cents(200))), "CREDIT_LIMIT_EXCEEDED"));
        CHECK(check_event(s, test::purchase(d, cents(100))).empty());
    }
    SUBCASE("payment beyond cash") {
        auto s = test::make_state(cents(1000), cents(5000), cents(950000), d);
        CHECK(has_code(check_event(s, test::payment(d, cents(2000))), "PAYMENT_EXCEEDS_CASH"));
    }
    SUBCASE("wrong day") {
        auto s = test::make_state(cents(1000), cents(0), cents(950000), d);
        CHECK(has_code(check_event(s, test::purchase(d.plus_days(-1), cents(200))), "DATE_MISMATCH"));
    }
    SUBCASE("wrong sign") {
        auto s = test::make_state(cents(1000), cents(0), cents(950000), d);
        CHECK(has_code(check_event(s, test::purchase(d, cents(-200))), "MALFORMED_EVENT"));
    }
    SUBCASE("income cannot be invented") {
        auto s = test::make_state(cents(1000), cents(0), cents(950000), d);
        auto e = test::purchase(d, cents(5000));
        e.kind = EventKind::income_deposit;
        CHECK(has_code(check_event(s, e), "UNSCHEDULED_INCOME"));
    }
}

TEST_CASE("scheduled items on their day") {
    const Date d = day(2024, 1, 25);
    auto s = test::make_state(cents(0), cents(0), cents(950000), d);
    s.subscriptions.push_back({test::subscription("Netflix", cents(1549), 25), d});
    Rng rng(1);
    auto posted = post_scheduled_items(s, d, rng);
    REQUIRE(posted.size() == 1);
    CHECK(posted[0].kind == EventKind::subscription_charge);
    CHECK(posted[0].amount.cents() == 1549);
    CHECK(posted[0].engine_initiated);
    CHECK(s.subscriptions[0].next_date == day(2024, 2, 25));
    CHECK(s.credit_balance.cents() == 1549);
}

TEST_CASE("a bill without deviation posts its mean") {
    const Date d = day(2024, 2, 1);
    auto s = test::make_state(cents(0), cents(0), cents(950000), d);
    s.bills.push_back({test::bill("FirstEnergy", cents(12000), cents(0), 1), d});
    Rng rng(1);
    auto posted = post_scheduled_items(s, d, rng);
    REQUIRE(posted.size() == 1);
    CHECK(posted[0].amount.cents() == 12000);
}

TEST_CASE("quarterly schedule skips two months") {
    Date d = day(2024, 1, 15);
    auto s = test::make_state(cents(0), cents(0), cents(950000), d);
    auto magazine = test::subscription("Woodcraft Magazine", cents(3000), 15);
    magazine.charge_frequency_month = 3;
    s.subscriptions.push_back({magazine, d});
    std::vector<Date> charged;
    Rng rng(1);
    for (; d <= day(2024, 4, 30); d = d.plus_days(1)) {
        apply_control(s, {ControlKind::begin_day, d, {}});
        for (const auto& e : post_scheduled_items(s, d, rng)) charged.push_back(e.timestamp.date);
    }
    CHECK(charged == std::vector<Date>{day(2024, 1, 15), day(2024, 4, 15)});
    CHECK(charged == oracle::billing_dates(day(2024, 1, 15), 15, 3, day(2024, 4, 30)));
}

TEST_CASE("a declined subscription is cancelled") {
    const Date d = day(2024, 1, 25);
    auto s = test::make_state(cents(0), cents(99000), cents(100000), d);
    s.subscriptions.push_back({test::subscription("Netflix", cents(1549), 25), d});
    Rng rng(1);
    auto posted = post_scheduled_items(s, d, rng);
    REQUIRE(posted.size() == 1);
    CHECK(posted[0].kind == EventKind::cancel_subscription);
    CHECK(s.subscriptions.empty());
    CHECK(s.credit_balance.cents() == 99000);
}

TEST_CASE("a bill beyond the remaining credit is collected from checking first") {
    const Date d = day(2024, 1, 1);
    auto s = test::make_state(cents(50000), cents(99000), cents(100000), d);
    s.bills.push_back({test::bill("FirstEnergy", cents(12000), cents(0), 1), d});
    Rng rng(1);
    auto posted = post_scheduled_items(s, d, rng);
    REQUIRE(posted.size() == 2);
    CHECK(posted[0].kind == EventKind::payment);
    CHECK(posted[0].amount.cents() == -11000);
    CHECK(posted[1].kind == EventKind::recurring_bill);
    CHECK(s.credit_balance == s.credit_limit);
    CHECK(s.cash.cents() == 39000);
}

TEST_CASE("paychecks") {
    EngineConfig config;
    auto profile = test::make_persona().user_financial_profile;
    auto s = init_state(profile, day(2024, 1, 2), config);
    CHECK(s.next_income_date == day(2024, 1, 15));
    CHECK(income_dates_between(s, day(2024, 1, 2), day(2024, 3, 1)) ==
          std::vector<Date>{day(2024, 1, 15), day(2024, 2, 1), day(2024, 2, 15), day(2024, 3, 1)});
    CHECK(next_paycheck_on_or_after({1, 31}, day(2024, 2, 2)) == day(2024, 2, 29));
}

TEST_CASE("statement close") {
    EngineConfig config;
    const Date close = day(2024, 2, 29);
    SUBCASE("nothing carried") {
        auto s = test::make_state(cents(0), cents(0), cents(950000), close);
        auto posted = close_statement(s, close, config);
        CHECK(posted.empty());
        CHECK(s.due_date == close.plus_days(config.grace_days));
    }
    SUBCASE("carried 1000.00 and paid late") {
        auto s = test::make_state(cents(0), cents(100000), cents(950000), close);
        s.statement_amount = cents(100000);
        s.statement_balance_due = cents(100000);
        s.due_date = day(2024, 2, 21);
        auto posted = close_statement(s, close, config);
        REQUIRE(posted.size() == 2);
        CHECK(posted[0].kind == EventKind::fee);
        CHECK(posted[0].amount.cents() == 3500);
        CHECK(posted[1].kind == EventKind::interest);
        CHECK(posted[1].amount.cents() == 2000);
        CHECK(s.credit_balance.cents() == 105500);
        CHECK(s.statement_balance_due.cents() == 105500);
    }
    SUBCASE("paid in full by the due date") {
        auto s = test::make_state(cents(200000), cents(0), cents(950000), day(2024, 1, 31));
        s.credit_balance = cents(40000);
        close_statement(s, day(2024, 1, 31), config);
        REQUIRE(s.due_date == day(2024, 2, 21));
        apply_control(s, {ControlKind::begin_day, day(2024, 2, 20), {}});
        s = apply_event(s, test::payment(day(2024, 2, 20), cents(40000)));
        CHECK(s.statement_balance_due.is_zero());
        apply_control(s, {ControlKind::begin_day, close, {}});
        CHECK(close_statement(s, close, config).empty());
    }
    SUBCASE("minimum paid: interest on the remainder only") {
        auto s = test::make_state(cents(200000), cents(0), cents(950000), day(2024, 1, 31));
        s.credit_balance = cents(40000);
        close_statement(s, day(2024, 1, 31), config);
        apply_control(s, {ControlKind::begin_day, day(2024, 2, 21), {}});
        s = apply_event(s, test::payment(day(2024, 2, 21), cents(1200)));
        apply_control(s, {ControlKind::begin_day, close, {}});
        auto posted = close_statement(s, close, config);
        REQUIRE(posted.size() == 1);
        CHECK(posted[0].kind == EventKind::interest);
        CHECK(posted[0].amount == interest_on(cents(38800), 0.02));
    }
}

TEST_CASE("interest and minimum payment rounding") {
    CHECK(interest_on(cents(0), 0.02).is_zero());
    CHECK(interest_on(cents(1), 0.02).cents() == 1);
    CHECK(interest_on(cents(125), 0.02).cents() == 3);
    CHECK(minimum_payment(cents(40000), 0.03).cents() == 1200);
    CHECK(minimum_payment(cents(0), 0.03).is_zero());
}

TEST_CASE("state JSON round trip and hashing") {
    EngineConfig config;
    auto s = init_state(test::reference_persona().user_financial_profile, day(2024, 1, 1), config);
    s = apply_event(s, test::purchase(day(2024, 1, 1), cents(1234)));
    auto back = state_from_json(to_json(s));
    CHECK(back == s);
    CHECK(state_hash(back) == state_hash(s));
    auto other = s;
    other.cash += cents(1);
    CHECK(state_hash(other) != state_hash(s));
}

TEST_CASE("event JSON and export schema") {
    auto e = test::purchase(day(2024, 1, 1), cents(1549), "Netflix", "Streaming Service", 12 * 60 + 3);
    e.seq = 7;
    CHECK(event_from_json(to_json(e)) == e);
    auto line = export_json("u1", e);
    CHECK(line["user_id"] == "u1");
    CHECK(line["seq"] == 7);
    CHECK(line["timestamp"] == "2024-01-01T12:03:00Z");
    CHECK(line["merchant_name"] == "Netflix");
    CHECK(line["card_present_or_not"] == true);
    CHECK(line["amount"] == "15.49");
    CHECK(is_exportable(EventKind::purchase));
    CHECK_FALSE(is_exportable(EventKind::cancel_subscription));
    Control c{ControlKind::skip_charge, day(2024, 1, 5), "State Farm"};
    CHECK(control_from_json(to_json(c)) == c);
}

TEST_CASE("apply_event is pure and keeps the accounting identities (10,000 random cases)") {
    Rng rng(2024);
    const Date d = day(2024, 6, 1);
    int applied = 0;
    for (int i = 0; i < 10000; ++i) {
        auto limit = cents(rng.uniform_int(1, 2000000));
        auto s = test::make_state(cents(rng.uniform_int(-20000, 500000)), cents(rng.uniform_int(0, limit.cents())), limit, d);
        s.due_date = d.plus_days(rng.uniform_int(-5, 5));
        s.statement_balance_due = cents(rng.uniform_int(0, s.credit_balance.cents()));
        TransactionEvent e = rng.bernoulli(0.5) ? test::purchase(d, cents(rng.uniform_int(1, 300000)))
                                                : test::payment(d, cents(rng.uniform_int(1, 300000)));
        if (!check_event(s, e).empty()) {
            CHECK_THROWS_AS(apply_event(s, e), ContractViolation);
            continue;
        }
        ++applied;
        auto a = apply_event(s, e);
        auto b = apply_event(s, e);
        REQUIRE(a == b);
        if (e.kind == EventKind::payment) {
            REQUIRE(a.cash == s.cash + e.amount);
            REQUIRE(a.credit_balance == s.credit_balance + e.amount);
        } else {
            REQUIRE(a.cash == s.cash);
            REQUIRE(a.credit_balance == s.credit_balance + e.amount);
        }
        REQUIRE(a.credit_balance >= Money{});
        REQUIRE(a.credit_balance <= a.credit_limit);
    }
    CHECK(applied > 1000);
}
