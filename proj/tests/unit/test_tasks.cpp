#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "ledgerloop/tasks.hpp"
#include "oracles.hpp"

using namespace ledgerloop;
using test::cents;
using test::day;

namespace {

/// A user with `per_day` purchases on every `every`-th day.
UserRun make_user(const std::string& id, int days, int per_day = 2, int every = 1, std::optional<Date> illiquid = {}) {
    UserRun u;
    u.user_id = id;
    u.start_date = day(2024, 1, 1);
    u.days = days;
    u.illiquid_date = illiquid;
    if (illiquid) u.termination = Termination::illiquid;
    std::uint64_t seq = 1;
    for (int d = 0; d < days; d += every)
        for (int k = 0; k < per_day; ++k) {
            auto e = test::purchase(u.start_date.plus_days(d), cents(100 + d * 10 + k), id + "-shop" + std::to_string(k),
                                    "Store", 9 * 60 + 60 * k);
            e.seq = seq++;
            u.events.push_back(e);
        }
    return u;
}

RunData make_run(std::vector<UserRun> users) {
    RunData run;
    run.users = std::move(users);
    return run;
}

}  // namespace

TEST_CASE("window bounds step by calendar months") {
    auto [s0, e0] = window_bounds(day(2024, 1, 1), 3, 1, 0);
    CHECK(s0 == day(2024, 1, 1));
    CHECK(e0 == day(2024, 4, 1));
    auto [s2, e2] = window_bounds(day(2024, 1, 31), 1, 1, 1);
    CHECK(s2 == day(2024, 2, 29));
    CHECK(e2 == day(2024, 3, 31));
}

TEST_CASE("label rule") {
    const Date last = day(2024, 3, 31);
    CHECK(illiquidity_label(last.plus_days(10), last, 30));
    CHECK_FALSE(illiquidity_label(last.plus_days(31), last, 30));
    CHECK(illiquidity_label(last.plus_days(31), last, std::nullopt));
    CHECK_FALSE(illiquidity_label(std::nullopt, last, 30));
    CHECK_FALSE(illiquidity_label(last, last, 30));
}

TEST_CASE("a user terminating 10 days after a window is labeled positive for that window") {
    // Window [Jan 1, Apr 1) ends on Mar 31; termination Apr 10.
    auto run = make_run({make_user("u1", 100, 1, 1, day(2024, 4, 10))});
    auto xs = build_illiquidity_examples(run, {3, 30, 1});
    REQUIRE(xs.size() == 1);
    CHECK(xs[0].window_end == day(2024, 4, 1));
    CHECK(xs[0].label == true);
}

TEST_CASE("never-illiquid users are all negative") {
    // 2024 is a leap year: 366 days reach Dec 31, so ten 3-month windows fit.
    auto run = make_run({make_user("u1", 366)});
    BuildReport report;
    auto xs = build_illiquidity_examples(run, {3, std::nullopt, 1}, &report);
    CHECK(xs.size() == 10);
    for (const auto& x : xs) CHECK(x.label == false);
    CHECK(report.positives == 0);
    CHECK(report.users_used == 1);
}

TEST_CASE("labels match a brute-force recomputation") {
    std::vector<UserRun> users;
    for (int i = 0; i < 12; ++i) {
        std::optional<Date> ill;
        if (i % 3 != 0) ill = day(2024, 1, 1).plus_days(60 + 27 * i);
        users.push_back(make_user("u" + std::to_string(i), ill ? static_cast<int>(*ill - day(2024, 1, 1)) + 1 : 400, 1, 2, ill));
    }
    auto run = make_run(users);
    for (int n : {1, 2, 3})
        for (std::optional<int> h : {std::optional<int>{}, std::optional<int>{45}}) {
            auto xs = build_illiquidity_examples(run, {n, h, 1});
            std::size_t expected_count = 0;
            for (const auto& u : users) {
                const Date last_day = u.start_date.plus_days(u.days - 1);
                for (int k = 0;; ++k) {
                    const Date start = u.start_date.plus_months(k);
                    const Date end = u.start_date.plus_months(k + n);
                    if (u.illiquid_date ? end.plus_days(-1) >= *u.illiquid_date : end.plus_days(-1) > last_day) break;
                    ++expected_count;
                    auto it = std::find_if(xs.begin(), xs.end(), [&](const TaskExample& x) {
                        return x.user_id == u.user_id && x.window_start == start;
                    });
                    REQUIRE(it != xs.end());
                    CHECK(it->label == oracle::illiquid_label(u.illiquid_date, end, h));
                    for (const auto& e : it->events) {
                        CHECK(e.timestamp.date >= start);
                        CHECK(e.timestamp.date < end);
                    }
                }
            }
            CHECK(xs.size() == expected_count);
        }
}

TEST_CASE("short and incomplete users are skipped and counted") {
    auto short_user = make_user("short", 40);
    auto broken = make_user("broken", 200);
    broken.incomplete = true;
    BuildReport report;
    auto xs = build_illiquidity_examples(make_run({short_user, broken}), {3, std::nullopt, 1}, &report);
    CHECK(xs.empty());
    CHECK(report.users_too_short == 1);
    CHECK(report.users_incomplete == 1);
}

TEST_CASE("donor day injection") {
    auto primary = make_user("primary", 120, 2);
    auto donor = make_user("donor", 120, 4, 7);
    const Date start = day(2024, 1, 1), end = day(2024, 4, 1);
    auto window = events_in(primary.events, start, end);
    Rng rng(9);
    auto x = inject_identity_theft(primary.user_id, window, donor, start, end, 3, rng);
    CHECK(std::count(x.event_labels.begin(), x.event_labels.end(), 1) == 4);
    CHECK(x.events.size() == window.size() + 4);
    CHECK(strip_injected(x) == window);
    REQUIRE(x.donor_day.has_value());
    REQUIRE(x.target_day.has_value());
    // Injected events keep the donor's order and times, re-dated to the target day.
    std::vector<TransactionEvent> from_donor;
    for (std::size_t i = 0; i < x.events.size(); ++i)
        if (x.event_labels[i] == 1) from_donor.push_back(x.events[i]);
    auto donor_day = events_in(donor.events, *x.donor_day, x.donor_day->plus_days(1));
    REQUIRE(from_donor.size() == donor_day.size());
    for (std::size_t i = 0; i < donor_day.size(); ++i) {
        CHECK(from_donor[i].merchant_name == donor_day[i].merchant_name);
        CHECK(from_donor[i].seq == donor_day[i].seq);
        CHECK(from_donor[i].timestamp.minute_of_day == donor_day[i].timestamp.minute_of_day);
        CHECK(from_donor[i].timestamp.date == *x.target_day);
    }
    CHECK(std::is_sorted(x.events.begin(), x.events.end(),
                         [](const TransactionEvent& a, const TransactionEvent& b) { return a.timestamp < b.timestamp; }));
}

TEST_CASE("ties keep the primary event first") {
    UserRun donor;
    donor.user_id = "d";
    donor.start_date = day(2024, 1, 1);
    donor.days = 1;
    auto e = test::purchase(day(2024, 1, 1), cents(500), "D", "Store", 600);
    e.seq = 1;
    donor.events.push_back(e);
    std::vector<TransactionEvent> primary{test::purchase(day(2024, 1, 1), cents(700), "P", "Store", 600)};
    Rng rng(1);
    auto x = inject_identity_theft("p", primary, donor, day(2024, 1, 1), day(2024, 1, 2), 1, rng);
    CHECK(x.event_labels == std::vector<int>{0, 1});
}

TEST_CASE("an idle donor is infeasible") {
    UserRun donor;
    donor.user_id = "d";
    donor.start_date = day(2024, 1, 1);
    Rng rng(1);
    CHECK_THROWS_AS(inject_identity_theft("p", {}, donor, day(2024, 1, 1), day(2024, 2, 1), 1, rng), InjectionInfeasible);
    CHECK_THROWS_AS(inject_identity_theft("d", {}, donor, day(2024, 1, 1), day(2024, 2, 1), 1, rng), InjectionInfeasible);
}

TEST_CASE("theft builder: provenance, recovery and determinism") {
    auto run = make_run({make_user("a", 200, 2), make_user("b", 200, 3, 3), make_user("c", 200, 1, 5)});
    BuildReport report;
    auto xs = build_theft_examples(run, {2, 1, 7}, &report);
    CHECK(xs.size() == report.examples);
    CHECK(xs.size() == 3 * 5);
    for (const auto& x : xs) {
        const auto* primary = run.find(x.user_id);
        REQUIRE(primary != nullptr);
        CHECK(strip_injected(x) == events_in(primary->events, x.window_start, x.window_end));
        const auto* donor = run.find(*x.donor_user_id);
        REQUIRE(donor != nullptr);
        CHECK(donor->user_id != x.user_id);
        auto day_events = events_in(donor->events, *x.donor_day, x.donor_day->plus_days(1));
        CHECK(static_cast<std::size_t>(std::count(x.event_labels.begin(), x.event_labels.end(), 1)) == day_events.size());
    }
    CHECK(build_theft_examples(run, {2, 1, 7}) == xs);
}

TEST_CASE("split by user") {
    std::vector<TaskExample> xs;
    for (int u = 0; u < 10; ++u)
        for (int k = 0; k < 3; ++k) {
            TaskExample x;
            x.example_id = "x" + std::to_string(u) + "-" + std::to_string(k);
            x.user_id = "user" + std::to_string(u);
            x.label = (u + k) % 4 == 0;
            xs.push_back(x);
        }
    auto parts = split_by_user(xs, {{"train", 0.8}, {"test", 0.2}}, 42);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].users.size() == 8);
    CHECK(parts[1].users.size() == 2);
    CHECK(parts[0].examples.size() == 24);
    std::set<std::string> train(parts[0].users.begin(), parts[0].users.end());
    for (const auto& u : parts[1].users) CHECK(train.count(u) == 0);
    for (const auto& p : parts)
        for (const auto& x : p.examples) CHECK(x.split == p.name);
    auto again = split_by_user(xs, {{"train", 0.8}, {"test", 0.2}}, 42);
    CHECK(again[0].users == parts[0].users);
    CHECK_THROWS_AS(split_by_user(xs, {{"train", 0.5}, {"test", 0.2}}, 1), SplitError);
    CHECK_THROWS_AS(split_by_user({xs[0]}, {{"train", 0.5}, {"test", 0.5}}, 1), SplitError);
}

TEST_CASE("task files round trip") {
    auto run = make_run({make_user("a", 100, 2), make_user("b", 100, 3, 3)});
    auto xs = build_theft_examples(run, {1, 1, 3});
    auto ill = build_illiquidity_examples(run, {1, 30, 1});
    xs.insert(xs.end(), ill.begin(), ill.end());
    auto dir = test::scratch_dir("tasks");
    write_task(dir / "t.jsonl", xs);
    auto back = read_task(dir / "t.jsonl");
    REQUIRE(back.size() == xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(back[i].example_id == xs[i].example_id);
        CHECK(back[i].label == xs[i].label);
        CHECK(back[i].event_labels == xs[i].event_labels);
        REQUIRE(back[i].events.size() == xs[i].events.size());
        for (std::size_t j = 0; j < xs[i].events.size(); ++j)
            CHECK(export_json("u", back[i].events[j]) == export_json("u", xs[i].events[j]));
    }
}
