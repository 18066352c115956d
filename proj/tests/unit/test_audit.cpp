#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "ledgerloop/audit.hpp"
#include "ledgerloop/engine.hpp"

using namespace ledgerloop;
using test::cents;

namespace {

struct Fixture {
    EngineConfig config;
    RuleRegistry registry;
    UserTrace trace;

    Fixture() {
        config.max_days = 90;
        registry = make_registry(config);
        MockProposer proposer(config);
        trace = simulate_user(test::sample_personas(1).at(0), config, registry, proposer);
    }

    std::vector<ExportedEvent> exported() const {
        std::vector<ExportedEvent> out;
        for (const auto& e : trace.events)
            if (is_exportable(e.kind)) out.push_back({trace.user_id, e});
        return out;
    }

    std::vector<SnapshotLine> snapshots() const {
        std::vector<SnapshotLine> out;
        for (const auto& s : trace.snapshots) out.push_back({trace.user_id, s.date, s.state_hash});
        return out;
    }
};

std::size_t first_event_transition(const std::vector<AuditRecord>& records, EventKind kind) {
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].kind == AuditKind::transition && records[i].payload.contains("event") &&
            records[i].payload["event"]["kind"] == std::string(to_string(kind)))
            return i;
    return records.size();
}

}  // namespace

TEST_CASE("record JSON round trip") {
    AuditRecord r;
    r.user_id = "u";
    r.day = test::day(2024, 1, 2);
    r.step = 5;
    r.kind = AuditKind::transition;
    r.payload = {{"control", {{"kind", "begin_day"}, {"date", "2024-01-02"}}}};
    r.pre_hash = 0xffffffffffffffffULL;
    r.post_hash = 1;
    CHECK(audit_record_from_json(to_json(r)) == r);
    r.kind = AuditKind::check;
    r.rule_id = "credit_balance";
    r.verdict = Verdict::fail;
    r.pre_hash.reset();
    r.post_hash.reset();
    CHECK(audit_record_from_json(to_json(r)) == r);
    CHECK(parse_audit_kind("REJECTION") == AuditKind::rejection);
    CHECK(to_string(AuditKind::dropped) == "DROPPED");
}

TEST_CASE("the writer chains hashes and orders steps") {
    Fixture f;
    const auto& records = f.trace.audit;
    REQUIRE_FALSE(records.empty());
    CHECK(records.front().kind == AuditKind::init);
    std::optional<std::uint64_t> last = records.front().post_hash;
    for (std::size_t i = 1; i < records.size(); ++i) {
        CHECK(records[i].step > records[i - 1].step);
        if (records[i].kind != AuditKind::transition) continue;
        REQUIRE(records[i].pre_hash == last);
        last = records[i].post_hash;
    }
    CHECK(last == state_hash(f.trace.final_state));
}

TEST_CASE("replay reproduces the final state") {
    Fixture f;
    auto initial = initial_state(f.trace.audit);
    REQUIRE(initial.has_value());
    CHECK(*initial == f.trace.initial);
    auto replayed = replay(f.trace.audit, *initial);
    CHECK(state_hash(replayed) == state_hash(f.trace.final_state));
    CHECK(replayed == f.trace.final_state);
}

TEST_CASE("replaying nothing leaves the initial state") {
    auto s = test::make_state(cents(5), cents(6), cents(7), test::day(2024, 1, 1));
    CHECK(replay({}, s) == s);
}

TEST_CASE("a mutated payload diverges at its index") {
    Fixture f;
    auto records = f.trace.audit;
    auto i = first_event_transition(records, EventKind::purchase);
    REQUIRE(i < records.size());
    auto amount = Money::parse(records[i].payload["event"]["amount"].get<std::string>());
    records[i].payload["event"]["amount"] = (*amount + cents(1)).str();
    try {
        replay(records, f.trace.initial);
        FAIL("expected ReplayDivergence");
    } catch (const ReplayDivergence& e) {
        CHECK(e.index() == i);
    }
}

TEST_CASE("a broken pre-hash diverges at its index") {
    Fixture f;
    auto records = f.trace.audit;
    std::size_t i = records.size() / 2;
    while (records[i].kind != AuditKind::transition) ++i;
    *records[i].pre_hash ^= 1;
    try {
        replay(records, f.trace.initial);
        FAIL("expected ReplayDivergence");
    } catch (const ReplayDivergence& e) {
        CHECK(e.index() == i);
    }
}

TEST_CASE("verify: clean trace") {
    Fixture f;
    auto report = verify(f.trace.audit, f.exported(), f.registry, f.snapshots());
    CHECK(report.clean());
    CHECK(report.users == 1);
    CHECK(report.exported_events == f.exported().size());
    CHECK(report.first_findings.empty());
    CHECK(format_report(report).find("clean") != std::string::npos);
    auto again = verify(f.trace.audit, f.exported(), f.registry, f.snapshots());
    CHECK(again.transitions == report.transitions);
}

TEST_CASE("verify: a deleted events line is an unexported transition") {
    Fixture f;
    auto events = f.exported();
    events.erase(events.begin() + static_cast<std::ptrdiff_t>(events.size() / 2));
    auto report = verify(f.trace.audit, events, f.registry);
    CHECK(report.missing_exports == 1);
    CHECK(report.missing_transitions == 0);
    CHECK(report.chain_breaks == 0);
    REQUIRE(report.first_findings.size() == 1);
    CHECK(report.first_findings[0].check == "missing_export");
}

TEST_CASE("verify: an exported event with no transition") {
    Fixture f;
    auto events = f.exported();
    auto extra = events.back();
    extra.event.seq += 1000;
    events.push_back(extra);
    auto report = verify(f.trace.audit, events, f.registry);
    CHECK(report.missing_transitions == 1);
    CHECK_FALSE(report.clean());
}

TEST_CASE("verify: an appended limit-violating transition is an invariant finding") {
    Fixture f;
    auto records = f.trace.audit;
    LedgerState s = f.trace.final_state;
    auto e = test::purchase(s.current_date, s.available_credit() + cents(100), "Jewelry Box", "Jewelry Store", 23 * 60);
    const auto pre = state_hash(s);
    apply_event_unchecked(s, e);
    AuditRecord r;
    r.user_id = f.trace.user_id;
    r.day = s.current_date;
    r.step = records.back().step + 1;
    r.kind = AuditKind::transition;
    r.payload = {{"event", nlohmann::json(to_json(e))}};
    r.pre_hash = pre;
    r.post_hash = state_hash(s);
    records.push_back(r);
    auto events = f.exported();
    events.push_back({f.trace.user_id, e});
    auto report = verify(records, events, f.registry);
    CHECK(report.invariant_failures == 1);
    CHECK(report.chain_breaks == 0);
    CHECK(report.missing_exports == 0);
    REQUIRE_FALSE(report.first_findings.empty());
    CHECK(report.first_findings[0].check == "invariant");
    CHECK(report.first_findings[0].detail.find("CREDIT_LIMIT_EXCEEDED") != std::string::npos);
}

TEST_CASE("verify: tampered snapshot") {
    Fixture f;
    auto snaps = f.snapshots();
    snaps[3].state_hash ^= 1;
    auto report = verify(f.trace.audit, f.exported(), f.registry, snaps);
    CHECK(report.snapshot_mismatches == 1);
}
