#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/ledger.hpp"
#include "ledgerloop/rules.hpp"

namespace ledgerloop {

enum class AuditKind { init, check, transition, prompt, plan, rejection, dropped, termination };
enum class Verdict { pass, fail };

std::string_view to_string(AuditKind kind);  // "INIT", "CHECK", ...
std::optional<AuditKind> parse_audit_kind(std::string_view text);

struct AuditRecord {
    std::string user_id;
    Date day;
    std::uint64_t step = 0;  // per-user, strictly increasing
    AuditKind kind = AuditKind::check;
    std::optional<std::string> rule_id;
    std::optional<Verdict> verdict;
    /// TRANSITION: {"event": ...} or {"control": ...}; INIT: {"state": ...}; others free-form.
    nlohmann::json payload;
    std::optional<std::uint64_t> pre_hash;
    std::optional<std::uint64_t> post_hash;

    friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

nlohmann::ordered_json to_json(const AuditRecord& record);
AuditRecord audit_record_from_json(const nlohmann::json& j);

/// Per-user append-only recorder. As a Journal it turns every committed
/// transition into a hash-chained TRANSITION record.
class AuditWriter final : public Journal {
public:
    explicit AuditWriter(std::string user_id) : user_id_(std::move(user_id)) {}

    void init(const LedgerState& initial);
    void set_day(Date day) { day_ = day; }
    void on_transition(const Transition& transition, const LedgerState& after) override;
    void record(AuditKind kind, nlohmann::json payload, std::optional<std::string> rule_id = std::nullopt,
                std::optional<Verdict> verdict = std::nullopt);

    const std::vector<AuditRecord>& records() const { return records_; }
    std::vector<AuditRecord> take() { return std::move(records_); }
    std::uint64_t last_hash() const { return last_hash_; }

private:
    std::string user_id_;
    Date day_;
    std::uint64_t step_ = 0;
    std::uint64_t last_hash_ = 0;
    std::vector<AuditRecord> records_;
};

class ReplayDivergence : public std::runtime_error {
public:
    ReplayDivergence(std::size_t index, const std::string& message)
        : std::runtime_error(message), index_(index) {}
    /// Position of the first bad record in the list handed to replay.
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Initial state carried by the user's INIT record.
std::optional<LedgerState> initial_state(const std::vector<AuditRecord>& records);

/// Re-applies every TRANSITION to `initial`, checking the hash chain on both
/// sides of each step.
LedgerState replay(const std::vector<AuditRecord>& records, const LedgerState& initial);

struct Finding {
    std::string check;  // hash_chain, missing_transition, missing_export, invariant, snapshot
    std::string user_id;
    std::string detail;
};

struct VerifyReport {
    std::size_t users = 0;
    std::size_t records = 0;
    std::size_t transitions = 0;
    std::size_t exported_events = 0;
    std::size_t chain_breaks = 0;
    std::size_t missing_transitions = 0;  // exported event without a TRANSITION
    std::size_t missing_exports = 0;      // exportable TRANSITION without an exported event
    std::size_t invariant_failures = 0;
    std::size_t snapshot_mismatches = 0;
    std::vector<Finding> first_findings;  // capped

    bool clean() const {
        return chain_breaks + missing_transitions + missing_exports + invariant_failures + snapshot_mismatches == 0;
    }
};

/// Exported event line as read back from events.jsonl.
struct ExportedEvent {
    std::string user_id;
    TransactionEvent event;
};

struct SnapshotLine {
    std::string user_id;
    Date date;
    std::uint64_t state_hash = 0;
};

/// Read-only consistency checks over one run: (a) hash chain, (b) every exported
/// event has a TRANSITION, (c) every exportable TRANSITION was exported,
/// (d) no accepted event fails an invariant rule, plus end-of-day snapshot hashes.
VerifyReport verify(const std::vector<AuditRecord>& records, const std::vector<ExportedEvent>& events,
                    const RuleRegistry& registry, const std::vector<SnapshotLine>& snapshots = {});

std::string format_report(const VerifyReport& report);

}  // namespace ledgerloop
