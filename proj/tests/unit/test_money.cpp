#include <doctest.h>

#include "ledgerloop/money.hpp"

using ledgerloop::Money;

TEST_CASE("parse decimal strings into cents") {
    CHECK(Money::parse("12.34")->cents() == 1234);
    CHECK(Money::parse("-5")->cents() == -500);
    CHECK(Money::parse("+0.5")->cents() == 50);
    CHECK(Money::parse("1,234.00")->cents() == 123400);
    CHECK(Money::parse("15.49")->cents() == 1549);
}

TEST_CASE("digits past the cent round half-up on the magnitude") {
    CHECK(Money::parse("0.005")->cents() == 1);
    CHECK(Money::parse("0.0049")->cents() == 0);
    CHECK(Money::parse("-0.005")->cents() == -1);
}

TEST_CASE("garbage is rejected") {
    CHECK_FALSE(Money::parse("abc").has_value());
    CHECK_FALSE(Money::parse("").has_value());
    CHECK_FALSE(Money::parse("1.2.3").has_value());
    CHECK_FALSE(Money::parse("12a").has_value());
}

TEST_CASE("from_dollars_rounded avoids binary drift") {
    CHECK(Money::from_dollars_rounded(15.49).cents() == 1549);
    CHECK(Money::from_dollars_rounded(0.1 + 0.2).cents() == 30);
    CHECK(Money::from_dollars_rounded(-120.0).cents() == -12000);
}

TEST_CASE("string forms") {
    CHECK(Money::from_cents(-123450).str() == "-1234.50");
    CHECK(Money::from_cents(5).str() == "0.05");
    CHECK(ledgerloop::format_usd(Money::from_cents(123456)) == "$1,234.56");
    CHECK(ledgerloop::format_usd(Money::from_cents(-1200)) == "-$12.00");
}

TEST_CASE("str and parse round trip") {
    for (std::int64_t c : {0LL, 1LL, -1LL, 99LL, 100LL, 123456789LL, -987654321LL}) {
        auto m = Money::from_cents(c);
        CHECK(Money::parse(m.str())->cents() == c);
    }
}

TEST_CASE("round_half_up") {
    CHECK(ledgerloop::round_half_up(2.5) == 3);
    CHECK(ledgerloop::round_half_up(-2.5) == -2);
    CHECK(ledgerloop::round_half_up(2.4999) == 2);
}

TEST_CASE("arithmetic and ordering") {
    auto a = Money::from_cents(300);
    auto b = Money::from_cents(-700);
    CHECK((a + b).cents() == -400);
    CHECK((a - b).cents() == 1000);
    CHECK(b.abs().cents() == 700);
    CHECK(ledgerloop::min(a, b) == b);
    CHECK(ledgerloop::max(a, b) == a);
    CHECK(b < a);
}
