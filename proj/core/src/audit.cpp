#include "ledgerloop/audit.hpp"

#include <array>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace ledgerloop {

namespace {

constexpr std::array<std::string_view, 8> kKindNames{"INIT",       "CHECK",   "TRANSITION", "PROMPT",
                                                     "PLAN",       "REJECTION", "DROPPED",  "TERMINATION"};
constexpr std::size_t kMaxFindings = 20;

std::uint64_t parse_hex(const std::string& text) { return std::stoull(text, nullptr, 16); }

void note(VerifyReport& r, std::string check, const std::string& user, std::string detail) {
    if (r.first_findings.size() < kMaxFindings) r.first_findings.push_back({std::move(check), user, std::move(detail)});
}

// Exported fields only; seq and user identify the line.
auto export_key(const TransactionEvent& e) {
    return std::make_tuple(e.timestamp, e.merchant_name, e.merchant_type, e.card_present, e.amount, e.kind);
}

}  // namespace

std::string_view to_string(AuditKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<AuditKind> parse_audit_kind(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == text) return static_cast<AuditKind>(i);
    return std::nullopt;
}

nlohmann::ordered_json to_json(const AuditRecord& r) {
    nlohmann::ordered_json j;
    j["user_id"] = r.user_id;
    j["day"] = r.day.iso();
    j["step"] = r.step;
    j["kind"] = to_string(r.kind);
    if (r.rule_id) j["rule_id"] = *r.rule_id;
    if (r.verdict) j["verdict"] = *r.verdict == Verdict::pass ? "pass" : "fail";
    j["payload"] = r.payload;
    if (r.pre_hash) j["pre_hash"] = hex64(*r.pre_hash);
    if (r.post_hash) j["post_hash"] = hex64(*r.post_hash);
    return j;
}

AuditRecord audit_record_from_json(const nlohmann::json& j) {
    AuditRecord r;
    r.user_id = j.at("user_id").get<std::string>();
    auto day = Date::parse(j.at("day").get<std::string>());
    if (!day) throw std::invalid_argument("audit record: bad day");
    r.day = *day;
    r.step = j.at("step").get<std::uint64_t>();
    auto kind = parse_audit_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("audit record: unknown kind");
    r.kind = *kind;
    if (j.contains("rule_id")) r.rule_id = j["rule_id"].get<std::string>();
    if (j.contains("verdict")) r.verdict = j["verdict"].get<std::string>() == "pass" ? Verdict::pass : Verdict::fail;
    r.payload = j.value("payload", nlohmann::json::object());
    if (j.contains("pre_hash")) r.pre_hash = parse_hex(j["pre_hash"].get<std::string>());
    if (j.contains("post_hash")) r.post_hash = parse_hex(j["post_hash"].get<std::string>());
    return r;
}

void AuditWriter::init(const LedgerState& initial) {
    day_ = initial.current_date;
    last_hash_ = state_hash(initial);
    AuditRecord r;
    r.user_id = user_id_;
    r.day = day_;
    r.step = step_++;
    r.kind = AuditKind::init;
    r.payload = {{"state", to_json(initial)}};
    r.post_hash = last_hash_;
    records_.push_back(std::move(r));
}

void AuditWriter::on_transition(const Transition& t, const LedgerState& after) {
    AuditRecord r;
    r.user_id = user_id_;
    r.day = day_;
    r.step = step_++;
    r.kind = AuditKind::transition;
    if (t.is_event)
        r.payload = {{"event", to_json(t.event)}};
    else
        r.payload = {{"control", to_json(t.control)}};
    r.pre_hash = last_hash_;
    last_hash_ = state_hash(after);
    r.post_hash = last_hash_;
    records_.push_back(std::move(r));
}

void AuditWriter::record(AuditKind kind, nlohmann::json payload, std::optional<std::string> rule_id,
                         std::optional<Verdict> verdict) {
    AuditRecord r;
    r.user_id = user_id_;
    r.day = day_;
    r.step = step_++;
    r.kind = kind;
    r.rule_id = std::move(rule_id);
    r.verdict = verdict;
    r.payload = std::move(payload);
    records_.push_back(std::move(r));
}

std::optional<LedgerState> initial_state(const std::vector<AuditRecord>& records) {
    for (const auto& r : records)
        if (r.kind == AuditKind::init) return state_from_json(r.payload.at("state"));
    return std::nullopt;
}

LedgerState replay(const std::vector<AuditRecord>& records, const LedgerState& initial) {
    LedgerState s = initial;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.kind != AuditKind::transition) continue;
        if (!r.pre_hash || *r.pre_hash != state_hash(s))
            throw ReplayDivergence(i, fmt::format("record {}: pre-state hash does not match the replayed state", i));
        try {
            if (r.payload.contains("event")) {
                s = apply_event(s, event_from_json(r.payload.at("event")));
            } else {
                apply_control(s, control_from_json(r.payload.at("control")));
            }
        } catch (const ReplayDivergence&) {
            throw;
        } catch (const std::exception& e) {
            throw ReplayDivergence(i, fmt::format("record {}: {}", i, e.what()));
        }
        if (!r.post_hash || *r.post_hash != state_hash(s))
            throw ReplayDivergence(i, fmt::format("record {}: post-state hash does not match the replayed state", i));
    }
    return s;
}

VerifyReport verify(const std::vector<AuditRecord>& records, const std::vector<ExportedEvent>& events,
                    const RuleRegistry& registry, const std::vector<SnapshotLine>& snapshots) {
    VerifyReport report;
    report.records = records.size();
    report.exported_events = events.size();

    std::vector<std::string> order;
    std::map<std::string, std::vector<const AuditRecord*>> by_user;
    for (const auto& r : records) {
        auto [it, fresh] = by_user.try_emplace(r.user_id);
        if (fresh) order.push_back(r.user_id);
        it->second.push_back(&r);
    }
    report.users = order.size();

    using Key = std::pair<std::string, std::uint64_t>;
    std::map<Key, TransactionEvent> exportable;
    std::map<std::pair<std::string, Date>, std::uint64_t> end_of_day;

    for (const auto& user : order) {
        const auto& list = by_user[user];
        std::optional<LedgerState> state;
        std::optional<std::uint64_t> prev_step;
        bool broken = false;
        for (const auto* r : list) {
            if (prev_step && r->step <= *prev_step && !broken) {
                ++report.chain_breaks;
                note(report, "hash_chain", user, fmt::format("step {} out of order", r->step));
                broken = true;
            }
            prev_step = r->step;
            if (r->kind == AuditKind::init) {
                try {
                    state = state_from_json(r->payload.at("state"));
                } catch (const std::exception& e) {
                    if (!broken) ++report.chain_breaks;
                    note(report, "hash_chain", user, fmt::format("unreadable INIT: {}", e.what()));
                    broken = true;
                }
                if (state) end_of_day[{user, r->day}] = state_hash(*state);
                continue;
            }
            if (r->kind != AuditKind::transition) continue;
            ++report.transitions;
            if (broken) continue;
            if (!state) {
                ++report.chain_breaks;
                note(report, "hash_chain", user, "TRANSITION before INIT");
                broken = true;
                continue;
            }
            if (!r->pre_hash || *r->pre_hash != state_hash(*state)) {
                ++report.chain_breaks;
                note(report, "hash_chain", user, fmt::format("step {}: pre-state hash mismatch", r->step));
                broken = true;
                continue;
            }
            try {
                if (r->payload.contains("event")) {
                    TransactionEvent e = event_from_json(r->payload.at("event"));
                    auto failed = registry.check_event(*state, e, std::nullopt, true);
                    if (!failed.empty()) {
                        ++report.invariant_failures;
                        note(report, "invariant", user,
                             fmt::format("seq {}: {} ({})", e.seq, failed.front().code, failed.front().message));
                    }
                    apply_event_unchecked(*state, e);
                    if (is_exportable(e.kind)) exportable.emplace(Key{user, e.seq}, e);
                } else {
                    apply_control(*state, control_from_json(r->payload.at("control")));
                }
            } catch (const std::exception& ex) {
                ++report.chain_breaks;
                note(report, "hash_chain", user, fmt::format("step {}: unreadable payload: {}", r->step, ex.what()));
                broken = true;
                continue;
            }
            const auto h = state_hash(*state);
            if (!r->post_hash || *r->post_hash != h) {
                ++report.chain_breaks;
                note(report, "hash_chain", user, fmt::format("step {}: post-state hash mismatch", r->step));
                broken = true;
                continue;
            }
            end_of_day[{user, r->day}] = h;
        }
    }

    std::set<Key> seen;
    for (const auto& x : events) {
        Key key{x.user_id, x.event.seq};
        auto it = exportable.find(key);
        if (it == exportable.end() || export_key(it->second) != export_key(x.event) || !seen.insert(key).second) {
            ++report.missing_transitions;
            note(report, "missing_transition", x.user_id, fmt::format("exported seq {} has no matching TRANSITION", x.event.seq));
        }
    }
    for (const auto& [key, e] : exportable) {
        if (seen.count(key) == 0) {
            ++report.missing_exports;
            note(report, "missing_export", key.first, fmt::format("TRANSITION seq {} ({}) was not exported", key.second,
                                                                 to_string(e.kind)));
        }
    }
    for (const auto& snap : snapshots) {
        auto it = end_of_day.find({snap.user_id, snap.date});
        if (it == end_of_day.end() || it->second != snap.state_hash) {
            ++report.snapshot_mismatches;
            note(report, "snapshot", snap.user_id, fmt::format("{}: snapshot hash does not match the chain", snap.date.iso()));
        }
    }
    return report;
}

std::string format_report(const VerifyReport& r) {
    std::string out;
    out += fmt::format("users: {}\naudit records: {}\ntransitions: {}\nexported events: {}\n", r.users, r.records,
                       r.transitions, r.exported_events);
    out += fmt::format("(a) hash chain breaks: {}\n", r.chain_breaks);
    out += fmt::format("(b) exported events without a transition: {}\n", r.missing_transitions);
    out += fmt::format("(c) exportable transitions not exported: {}\n", r.missing_exports);
    out += fmt::format("(d) invariant failures among accepted events: {}\n", r.invariant_failures);
    out += fmt::format("snapshot mismatches: {}\n", r.snapshot_mismatches);
    for (const auto& f : r.first_findings) out += fmt::format("  {} [{}] {}\n", f.check, f.user_id, f.detail);
    out += r.clean() ? "result: clean\n" : "result: FINDINGS\n";
    return out;
}

}  // namespace ledgerloop
