#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "fixtures.hpp"
#include "ledgerloop/corpus_io.hpp"
#include "ledgerloop/engine.hpp"

using namespace ledgerloop;
using test::cents;
using test::day;

namespace {

/// Returns a fixed plan for every prompt.
class FixedProposer final : public Proposer {
public:
    explicit FixedProposer(std::vector<TransactionEvent> events = {}) : events_(std::move(events)) {}
    std::string_view name() const override { return "fixed"; }
    DailyPlan propose(const PromptSpec& prompt, const AugmentedPersona&, const LedgerState&, Rng&,
                      const ConversationWindow&) override {
        ++calls;
        DailyPlan p;
        for (auto e : events_) {
            e.timestamp.date = prompt.date;
            p.events.push_back(e);
        }
        return p;
    }
    int calls = 0;

private:
    std::vector<TransactionEvent> events_;
};

/// Spends whatever credit is left, every day.
class MaxOutProposer final : public Proposer {
public:
    std::string_view name() const override { return "max-out"; }
    DailyPlan propose(const PromptSpec& prompt, const AugmentedPersona&, const LedgerState& s, Rng&,
                      const ConversationWindow&) override {
        DailyPlan p;
        if (s.available_credit().is_positive())
            p.events.push_back(test::purchase(prompt.date, s.available_credit(), "Electronics Hub", "Electronics Store",
                                              18 * 60, "electronics"));
        return p;
    }
};

std::string plan_json(const std::string& payment_amount) {
    return R"({"reasoning": "pay the card", "transactions": [
        {"merchant_name": "Corner Market", "merchant_type": "Convenience Store", "card_present_or_not": true, "amount": "8.00", "kind": "purchase", "time": "09:00"},
        {"merchant_name": "Card Payment", "merchant_type": "Credit Card Payment", "card_present_or_not": false, "amount": ")" +
           payment_amount + R"(", "kind": "payment", "time": "19:00"}]})";
}

std::size_t count_kind(const std::vector<AuditRecord>& records, AuditKind kind) {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const AuditRecord& r) { return r.kind == kind; }));
}

EngineConfig quiet_config() {
    EngineConfig config;
    config.random_event_prob = 0.0;
    return config;
}

}  // namespace

TEST_CASE("an overpayment is repaired on the first retry") {
    auto config = quiet_config();
    auto registry = make_registry(config);
    auto persona = test::make_persona();
    const Date d = day(2024, 3, 12);
    auto s = test::make_state(cents(100000), cents(5000), cents(950000), d);
    auto client = std::make_shared<test::ScriptedClient>(std::deque<std::string>{plan_json("60.00"), plan_json("50.00")});
    ExternalProposer proposer(client, config);
    AuditWriter audit(persona.user_id);
    audit.init(s);
    ConversationWindow window;
    auto result = simulate_day(s, d, {config, registry, proposer, persona, &audit}, window);

    CHECK(result.rejections == 1);
    CHECK(result.dropped == 0);
    REQUIRE(result.accepted.has_value());
    REQUIRE(result.accepted->events.size() == 2);
    CHECK(result.accepted->events[1].amount == cents(-5000));
    CHECK(s.credit_balance == cents(800));
    CHECK(s.cash == cents(95000));

    const auto& records = audit.records();
    CHECK(count_kind(records, AuditKind::rejection) == 1);
    auto rejection = std::find_if(records.begin(), records.end(), [](const AuditRecord& r) { return r.kind == AuditKind::rejection; });
    auto payment = std::find_if(records.begin(), records.end(), [](const AuditRecord& r) {
        return r.kind == AuditKind::transition && r.payload.contains("event") && r.payload["event"]["kind"] == "payment";
    });
    REQUIRE(payment != records.end());
    CHECK(rejection < payment);
    CHECK(rejection->payload["violations"][0]["code"] == "OVERPAYMENT");
    REQUIRE(client->requests.size() == 2);
    CHECK(client->requests[1].back().content.find("[OVERPAYMENT]") != std::string::npos);
}

TEST_CASE("exhausted repairs drop only the offending drafts") {
    auto config = quiet_config();
    config.repair_retries = 2;
    auto registry = make_registry(config);
    auto persona = test::make_persona();
    const Date d = day(2024, 3, 12);
    auto s = test::make_state(cents(100000), cents(5000), cents(950000), d);
    FixedProposer proposer({test::purchase(d, cents(800)), test::payment(d, cents(6000))});
    AuditWriter audit(persona.user_id);
    audit.init(s);
    ConversationWindow window;
    auto result = simulate_day(s, d, {config, registry, proposer, persona, &audit}, window);
    CHECK(proposer.calls == 3);
    CHECK(result.rejections == 3);
    CHECK(result.dropped == 1);
    REQUIRE(result.accepted.has_value());
    REQUIRE(result.accepted->events.size() == 1);
    CHECK(result.accepted->events[0].kind == EventKind::purchase);
    CHECK(s.credit_balance == cents(5800));
    auto dropped = std::find_if(audit.records().begin(), audit.records().end(),
                                [](const AuditRecord& r) { return r.kind == AuditKind::dropped; });
    REQUIRE(dropped != audit.records().end());
    CHECK(dropped->payload["indices"] == nlohmann::json::array({1}));
}

TEST_CASE("a day with nothing proposed and nothing scheduled only moves the date") {
    auto config = quiet_config();
    auto registry = make_registry(config);
    auto persona = test::make_persona();
    auto s = test::make_state(cents(100000), cents(2500), cents(950000), day(2024, 3, 11));
    auto before = s;
    FixedProposer proposer;
    ConversationWindow window;
    auto result = simulate_day(s, day(2024, 3, 12), {config, registry, proposer, persona, nullptr}, window);
    CHECK(result.committed.empty());
    CHECK(s.current_date == day(2024, 3, 12));
    s.current_date = before.current_date;
    s.history_digest = before.history_digest;
    CHECK(s == before);
    CHECK(window.turns().size() == 1);
}

TEST_CASE("a maxed-out card pushes checking below the overdraft allowance") {
    auto config = quiet_config();
    config.paycheck.low = Money::from_dollars(50);
    config.max_days = 60;
    // Without the liquidity rule nothing stops the proposer from maxing out the card.
    std::erase(config.rules, "liquidity_solvency");
    auto registry = make_registry(config);
    auto persona = test::make_persona({.income = IncomeLevel::low,
                                       .credit_limit = Money::from_dollars(2000),
                                       .bills = {test::bill("Harbor Apartments", Money::from_dollars(1500), Money{}, 3)}});
    MaxOutProposer proposer;
    auto trace = simulate_user(persona, config, registry, proposer);
    REQUIRE(trace.termination == Termination::illiquid);
    REQUIRE(trace.illiquid_date.has_value());
    CHECK(*trace.illiquid_date == day(2024, 1, 3));
    CHECK(trace.snapshots.back().date == *trace.illiquid_date);
    CHECK(trace.snapshots.back().cash < config.overdraft_allowance);
    CHECK(trace.final_state.terminated_illiquid);
    CHECK(count_kind(trace.audit, AuditKind::termination) == 1);
    for (std::size_t i = 0; i + 1 < trace.snapshots.size(); ++i) CHECK(trace.snapshots[i].cash >= config.overdraft_allowance);
}

TEST_CASE("a monthly subscription charges three times in 90 days") {
    auto config = quiet_config();
    config.max_days = 90;
    auto registry = make_registry(config);
    auto persona = test::make_persona({.credit_limit = Money::from_dollars(20000),
                                       .subscriptions = {test::subscription("Netflix", cents(1549), 25)}});
    MockProposer proposer(config);
    auto trace = simulate_user(persona, config, registry, proposer);
    CHECK(trace.days == 90);
    auto charges = std::count_if(trace.events.begin(), trace.events.end(), [](const TransactionEvent& e) {
        return e.kind == EventKind::subscription_charge && e.merchant_name == "Netflix";
    });
    CHECK(charges == 3);
}

TEST_CASE("simulate_user is deterministic") {
    EngineConfig config;
    config.max_days = 90;
    auto registry = make_registry(config);
    auto persona = test::sample_personas(1).at(0);
    MockProposer p1(config), p2(config);
    auto a = simulate_user(persona, config, registry, p1);
    auto b = simulate_user(persona, config, registry, p2);
    CHECK(a.events == b.events);
    CHECK(a.snapshots == b.snapshots);
    CHECK(a.audit == b.audit);
    CHECK(state_hash(a.final_state) == state_hash(b.final_state));
    CHECK(a.days == 90);
}

TEST_CASE("committed events satisfy the invariants and the accounting identities") {
    EngineConfig config;
    config.max_days = 120;
    auto registry = make_registry(config);
    for (const auto& persona : test::sample_personas(4)) {
        MockProposer proposer(config);
        auto trace = simulate_user(persona, config, registry, proposer);
        LedgerState s = trace.initial;
        for (const auto& rec : trace.audit) {
            if (rec.kind != AuditKind::transition) continue;
            if (rec.payload.contains("event")) {
                auto e = event_from_json(rec.payload["event"]);
                REQUIRE(check_event(s, e).empty());
                const auto cash = s.cash, balance = s.credit_balance;
                apply_event_unchecked(s, e);
                const Money paid = e.kind == EventKind::payment ? e.amount.abs() : Money{};
                const Money income = e.kind == EventKind::income_deposit ? e.amount : Money{};
                const Money charged = (e.kind == EventKind::payment || e.kind == EventKind::income_deposit ||
                                       e.kind == EventKind::cancel_subscription)
                                          ? Money{}
                                          : e.amount;
                REQUIRE(s.cash == cash + income - paid);
                REQUIRE(s.credit_balance == balance + charged - paid);
                REQUIRE(s.credit_balance >= Money{});
                REQUIRE(s.credit_balance <= s.credit_limit);
            } else {
                apply_control(s, control_from_json(rec.payload["control"]));
            }
        }
        CHECK(s == trace.final_state);
    }
}

TEST_CASE("repeated backend failures mark the user incomplete") {
    auto config = quiet_config();
    config.max_days = 30;
    config.external.max_consecutive_failures = 3;
    auto registry = make_registry(config);
    auto client = std::make_shared<test::ScriptedClient>(std::deque<std::string>{});
    ExternalProposer proposer(client, config);
    auto trace = simulate_user(test::make_persona(), config, registry, proposer);
    CHECK(trace.incomplete);
    CHECK(trace.days == 3);
    CHECK(trace.plan_unavailable == 3);
}

TEST_CASE("horizon sampler") {
    EngineConfig config;
    CHECK(horizon_days(config, "a") == config.max_days);
    config.horizon = {true, 89, 400};
    config.max_days = 1101;
    for (const char* u : {"a", "b", "c", "d"}) {
        auto h = horizon_days(config, u);
        CHECK(h >= 89);
        CHECK(h <= 400);
        CHECK(h == horizon_days(config, u));
    }
}

TEST_CASE("corpus output does not depend on the worker count") {
    EngineConfig config;
    config.max_days = 60;
    auto registry = make_registry(config);
    auto personas = test::sample_personas(6);
    ProposerFactory factory = [&] { return std::make_unique<MockProposer>(config); };
    auto one = simulate_corpus(personas, config, registry, factory, 1);
    auto three = simulate_corpus(personas, config, registry, factory, 3);
    REQUIRE(one.size() == three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].user_id == personas[i].user_id);
        CHECK(one[i].events == three[i].events);
        CHECK(one[i].audit == three[i].audit);
    }
}

TEST_CASE("run_corpus writes the run directory and consistent totals") {
    EngineConfig config;
    config.max_days = 45;
    auto registry = make_registry(config);
    auto personas = test::sample_personas(5);
    auto out = test::scratch_dir("engine-run");
    ProposerFactory factory = [&] { return std::make_unique<MockProposer>(config); };
    auto manifest = run_corpus(personas, config, registry, factory, {out, "mock", 2});
    CHECK(manifest.run_dir == out / run_dir_name(config));
    for (auto name : {kEventsFile, kSnapshotsFile, kAuditFile, kManifestFile, kPersonasFile})
        CHECK(std::filesystem::exists(manifest.run_dir / name));
    std::size_t events = 0, exported = 0;
    for (const auto& u : manifest.users) {
        events += u.events;
        exported += u.exported_events;
    }
    CHECK(manifest.total_events == events);
    CHECK(manifest.total_exported == exported);
    CHECK(read_events(manifest.run_dir / kEventsFile).size() == exported);
    CHECK(manifest.users.size() == 5);

    auto run = load_run(manifest.run_dir);
    CHECK(run.users.size() == 5);
    CHECK(run.personas == personas);
    CHECK(config_hash_hex(run.config) == manifest.config_hash);
    CHECK(library_version() == run.manifest["version"].get<std::string>());
}
