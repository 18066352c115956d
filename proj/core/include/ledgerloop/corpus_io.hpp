#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/audit.hpp"
#include "ledgerloop/config.hpp"
#include "ledgerloop/engine.hpp"

namespace ledgerloop {

inline constexpr std::string_view kEventsFile = "events.jsonl";
inline constexpr std::string_view kSnapshotsFile = "snapshots.jsonl";
inline constexpr std::string_view kAuditFile = "audit.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kPersonasFile = "personas.jsonl";

class RunFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::ordered_json snapshot_json(const std::string& user_id, const DaySnapshot& snapshot);
DaySnapshot snapshot_from_json(const nlohmann::json& j);

/// One user of a finished run, rebuilt from its files.
struct UserRun {
    std::string user_id;
    Termination termination = Termination::horizon_reached;
    std::optional<Date> illiquid_date;
    bool incomplete = false;
    Date start_date;
    int days = 0;
    std::vector<TransactionEvent> events;  // exported events, seq order
    std::vector<DaySnapshot> snapshots;
};

struct RunData {
    std::filesystem::path dir;
    nlohmann::json manifest;
    EngineConfig config;
    std::vector<AugmentedPersona> personas;
    std::vector<UserRun> users;  // manifest order

    const UserRun* find(std::string_view user_id) const;
    const AugmentedPersona* persona(std::string_view user_id) const;
};

RunData load_run(const std::filesystem::path& dir, bool with_snapshots = true);

std::vector<ExportedEvent> read_events(const std::filesystem::path& file);
std::vector<AuditRecord> read_audit(const std::filesystem::path& file);
std::vector<SnapshotLine> read_snapshot_lines(const std::filesystem::path& file);

/// Writes `text` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Calls fn(line, line_number) for every non-blank line.
void for_each_line(const std::filesystem::path& file,
                   const std::function<void(const std::string&, std::size_t)>& fn);

}  // namespace ledgerloop
