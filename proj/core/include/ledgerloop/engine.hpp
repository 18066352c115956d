#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/audit.hpp"
#include "ledgerloop/config.hpp"
#include "ledgerloop/ledger.hpp"
#include "ledgerloop/persona.hpp"
#include "ledgerloop/prompt.hpp"
#include "ledgerloop/proposer.hpp"
#include "ledgerloop/rules.hpp"

namespace ledgerloop {

/// Library version string, e.g. "0.3.0".
std::string_view library_version();

enum class Termination { horizon_reached, illiquid };
std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view text);

/// End-of-day summary of the ledger.
struct DaySnapshot {
    Date date;
    Money cash;
    Money credit_balance;
    Money credit_limit;
    Money statement_balance_due;
    std::optional<Date> due_date;
    std::uint64_t state_hash = 0;

    friend bool operator==(const DaySnapshot&, const DaySnapshot&) = default;
};

DaySnapshot snapshot_of(const LedgerState& state);

struct DayResult {
    std::vector<TransactionEvent> committed;  // everything posted today, in seq order
    std::optional<DailyPlan> accepted;        // plan drafts that were committed
    int rejections = 0;
    int dropped = 0;
    bool plan_unavailable = false;
    bool backend_failure = false;
    bool random_event = false;
    bool terminated = false;
    /// Soft violations carried into tomorrow's feedback.
    std::vector<Violation> carry;
};

/// Everything one simulated day needs besides the state.
struct DayContext {
    const EngineConfig& config;
    const RuleRegistry& registry;
    Proposer& proposer;
    const AugmentedPersona& persona;
    AuditWriter* audit = nullptr;
};

/// One day of the closed loop: scheduled items, prompt, proposal, repair,
/// commit, statement close and the overdraft check. `date` must follow
/// state.current_date (or equal it on the first day).
DayResult simulate_day(LedgerState& state, Date date, const DayContext& ctx, ConversationWindow& window,
                       const std::vector<Violation>& carry = {});

struct UserTrace {
    std::string user_id;
    LedgerState initial;
    LedgerState final_state;
    std::vector<TransactionEvent> events;  // every committed event, seq order
    std::vector<DaySnapshot> snapshots;    // one per simulated day
    Termination termination = Termination::horizon_reached;
    std::optional<Date> illiquid_date;
    bool incomplete = false;  // stopped after repeated backend failures
    int days = 0;
    int rejections = 0;
    int dropped = 0;
    int random_events = 0;
    int plan_unavailable = 0;
    std::vector<AuditRecord> audit;
};

/// Days to simulate for a user: max_days, or a per-user draw when the horizon sampler is on.
int horizon_days(const EngineConfig& config, std::string_view user_id);

UserTrace simulate_user(const AugmentedPersona& persona, const EngineConfig& config, const RuleRegistry& registry,
                        Proposer& proposer, bool keep_audit = true);

using ProposerFactory = std::function<std::unique_ptr<Proposer>()>;

/// Simulates users on `jobs` workers and hands each finished trace to `sink`
/// in input order. Output is independent of `jobs`.
void for_each_trace(const std::vector<AugmentedPersona>& personas, const EngineConfig& config,
                    const RuleRegistry& registry, const ProposerFactory& factory, int jobs,
                    const std::function<void(std::size_t, UserTrace&&)>& sink, bool keep_audit = true);

std::vector<UserTrace> simulate_corpus(const std::vector<AugmentedPersona>& personas, const EngineConfig& config,
                                       const RuleRegistry& registry, const ProposerFactory& factory, int jobs = 1);

struct UserSummary {
    std::string user_id;
    Termination termination = Termination::horizon_reached;
    std::optional<Date> illiquid_date;
    bool incomplete = false;
    Date start_date;
    int days = 0;
    std::size_t events = 0;             // committed, including non-exported kinds
    std::size_t exported_events = 0;
    std::uint64_t final_state_hash = 0;
};

struct CorpusOptions {
    std::filesystem::path out_root;
    std::string backend = "mock";
    int jobs = 1;
};

struct CorpusManifest {
    std::filesystem::path run_dir;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<UserSummary> users;
    std::size_t total_events = 0;
    std::size_t total_exported = 0;
    std::size_t illiquid = 0;
    std::size_t incomplete = 0;
    nlohmann::ordered_json json;  // as written to manifest.json
};

/// "<config hash>-s<seed>"
std::string run_dir_name(const EngineConfig& config);

/// Simulates every persona and writes events.jsonl, snapshots.jsonl,
/// audit.jsonl, personas.jsonl and manifest.json under out_root/run_dir_name().
CorpusManifest run_corpus(const std::vector<AugmentedPersona>& personas, const EngineConfig& config,
                          const RuleRegistry& registry, const ProposerFactory& factory, const CorpusOptions& options);

}  // namespace ledgerloop
