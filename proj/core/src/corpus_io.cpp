#include "ledgerloop/corpus_io.hpp"

#include <chrono>
#include <fstream>
#include <map>

#include <fmt/format.h>

namespace ledgerloop {

namespace fs = std::filesystem;

namespace {

nlohmann::json parse_line(const std::string& line, const fs::path& file, std::size_t n) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw RunFormatError(fmt::format("{}:{}: {}", file.string(), n, e.what()));
    }
}

Money money_field(const nlohmann::json& j, const char* key) {
    auto m = Money::parse(j.at(key).get<std::string>());
    if (!m) throw RunFormatError(fmt::format("snapshot field {} is not an amount", key));
    return *m;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RunFormatError("cannot write " + path.string());
    return out;
}

nlohmann::ordered_json user_json(const UserSummary& u) {
    nlohmann::ordered_json j;
    j["user_id"] = u.user_id;
    j["termination"] = to_string(u.termination);
    j["illiquid_date"] = u.illiquid_date ? nlohmann::ordered_json(u.illiquid_date->iso()) : nlohmann::ordered_json();
    j["incomplete"] = u.incomplete;
    j["start_date"] = u.start_date.iso();
    j["days"] = u.days;
    j["events"] = u.events;
    j["exported_events"] = u.exported_events;
    j["final_state_hash"] = hex64(u.final_state_hash);
    return j;
}

}  // namespace

void for_each_line(const fs::path& file, const std::function<void(const std::string&, std::size_t)>& fn) {
    std::ifstream in(file);
    if (!in) throw RunFormatError("cannot open " + file.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(line, n);
    }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        auto out = open_out(tmp);
        out << text;
        if (!out.flush()) throw RunFormatError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

nlohmann::ordered_json snapshot_json(const std::string& user_id, const DaySnapshot& s) {
    nlohmann::ordered_json j;
    j["user_id"] = user_id;
    j["date"] = s.date.iso();
    j["cash"] = s.cash.str();
    j["credit_balance"] = s.credit_balance.str();
    j["credit_limit"] = s.credit_limit.str();
    j["statement_balance_due"] = s.statement_balance_due.str();
    j["due_date"] = s.due_date ? nlohmann::ordered_json(s.due_date->iso()) : nlohmann::ordered_json();
    j["state_hash"] = hex64(s.state_hash);
    return j;
}

DaySnapshot snapshot_from_json(const nlohmann::json& j) {
    DaySnapshot s;
    auto date = Date::parse(j.at("date").get<std::string>());
    if (!date) throw RunFormatError("snapshot date is not YYYY-MM-DD");
    s.date = *date;
    s.cash = money_field(j, "cash");
    s.credit_balance = money_field(j, "credit_balance");
    s.credit_limit = money_field(j, "credit_limit");
    s.statement_balance_due = money_field(j, "statement_balance_due");
    if (j.contains("due_date") && j["due_date"].is_string()) s.due_date = Date::parse(j["due_date"].get<std::string>());
    s.state_hash = std::stoull(j.at("state_hash").get<std::string>(), nullptr, 16);
    return s;
}

CorpusManifest run_corpus(const std::vector<AugmentedPersona>& personas, const EngineConfig& config,
                          const RuleRegistry& registry, const ProposerFactory& factory, const CorpusOptions& options) {
    if (personas.empty()) throw std::invalid_argument("run_corpus: no personas");
    const auto started = std::chrono::steady_clock::now();

    CorpusManifest m;
    m.seed = config.seed;
    m.config_hash = config_hash_hex(config);
    m.run_dir = options.out_root / run_dir_name(config);
    fs::create_directories(m.run_dir);

    write_personas(m.run_dir / kPersonasFile, personas);
    auto events = open_out(m.run_dir / kEventsFile);
    auto snapshots = open_out(m.run_dir / kSnapshotsFile);
    auto audit = open_out(m.run_dir / kAuditFile);

    for_each_trace(personas, config, registry, factory, options.jobs, [&](std::size_t, UserTrace&& t) {
        UserSummary u;
        u.user_id = t.user_id;
        u.termination = t.termination;
        u.illiquid_date = t.illiquid_date;
        u.incomplete = t.incomplete;
        u.start_date = config.start_date;
        u.days = t.days;
        u.events = t.events.size();
        u.final_state_hash = state_hash(t.final_state);
        for (const auto& e : t.events) {
            if (!is_exportable(e.kind)) continue;
            events << export_json(t.user_id, e).dump() << '\n';
            ++u.exported_events;
        }
        for (const auto& s : t.snapshots) snapshots << snapshot_json(t.user_id, s).dump() << '\n';
        for (const auto& r : t.audit) audit << to_json(r).dump() << '\n';
        m.total_events += u.events;
        m.total_exported += u.exported_events;
        m.illiquid += u.termination == Termination::illiquid ? 1 : 0;
        m.incomplete += u.incomplete ? 1 : 0;
        m.users.push_back(std::move(u));
    });
    for (auto* out : {&events, &snapshots, &audit})
        if (!out->flush()) throw RunFormatError("write failed in " + m.run_dir.string());

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    auto& j = m.json;
    j["tool"] = "ledgerloop";
    j["version"] = library_version();
    j["backend"] = options.backend;
    j["seed"] = config.seed;
    j["config_hash"] = m.config_hash;
    j["config"] = to_json(config);
    j["files"] = {{"events", kEventsFile}, {"snapshots", kSnapshotsFile}, {"audit", kAuditFile},
                  {"personas", kPersonasFile}};
    auto users = nlohmann::ordered_json::array();
    for (const auto& u : m.users) users.push_back(user_json(u));
    j["users"] = std::move(users);
    const double fraction = static_cast<double>(m.illiquid) / static_cast<double>(m.users.size());
    j["totals"] = {{"users", m.users.size()},       {"events", m.total_events},
                   {"exported_events", m.total_exported}, {"illiquid", m.illiquid},
                   {"illiquid_fraction", fraction}, {"incomplete", m.incomplete}};
    j["reference"] = {{"illiquid_fraction", 0.057}};
    // Everything above is a pure function of the inputs; this block is not.
    j["execution"] = {{"jobs", options.jobs}, {"seconds", seconds}};
    write_file_atomic(m.run_dir / kManifestFile, j.dump(2) + "\n");
    return m;
}

std::vector<ExportedEvent> read_events(const fs::path& file) {
    std::vector<ExportedEvent> out;
    for_each_line(file, [&](const std::string& line, std::size_t n) {
        auto j = parse_line(line, file, n);
        try {
            out.push_back({j.at("user_id").get<std::string>(), event_from_json(j)});
        } catch (const std::exception& e) {
            throw RunFormatError(fmt::format("{}:{}: {}", file.string(), n, e.what()));
        }
    });
    return out;
}

std::vector<AuditRecord> read_audit(const fs::path& file) {
    std::vector<AuditRecord> out;
    for_each_line(file, [&](const std::string& line, std::size_t n) {
        auto j = parse_line(line, file, n);
        try {
            out.push_back(audit_record_from_json(j));
        } catch (const std::exception& e) {
            throw RunFormatError(fmt::format("{}:{}: {}", file.string(), n, e.what()));
        }
    });
    return out;
}

std::vector<SnapshotLine> read_snapshot_lines(const fs::path& file) {
    std::vector<SnapshotLine> out;
    for_each_line(file, [&](const std::string& line, std::size_t n) {
        auto j = parse_line(line, file, n);
        auto s = snapshot_from_json(j);
        out.push_back({j.at("user_id").get<std::string>(), s.date, s.state_hash});
    });
    return out;
}

const UserRun* RunData::find(std::string_view user_id) const {
    for (const auto& u : users)
        if (u.user_id == user_id) return &u;
    return nullptr;
}

const AugmentedPersona* RunData::persona(std::string_view user_id) const {
    for (const auto& p : personas)
        if (p.user_id == user_id) return &p;
    return nullptr;
}

RunData load_run(const fs::path& dir, bool with_snapshots) {
    RunData run;
    run.dir = dir;
    {
        std::ifstream in(dir / kManifestFile);
        if (!in) throw RunFormatError("no manifest.json in " + dir.string());
        try {
            run.manifest = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw RunFormatError(fmt::format("manifest.json: {}", e.what()));
        }
    }
    run.config = config_from_json(run.manifest.at("config"));
    if (fs::exists(dir / kPersonasFile)) run.personas = load_personas(dir / kPersonasFile);

    std::map<std::string, std::size_t, std::less<>> index;
    for (const auto& u : run.manifest.at("users")) {
        UserRun r;
        r.user_id = u.at("user_id").get<std::string>();
        r.termination = parse_termination(u.at("termination").get<std::string>()).value_or(Termination::horizon_reached);
        if (u.contains("illiquid_date") && u["illiquid_date"].is_string())
            r.illiquid_date = Date::parse(u["illiquid_date"].get<std::string>());
        r.incomplete = u.value("incomplete", false);
        r.start_date = Date::parse(u.at("start_date").get<std::string>()).value_or(run.config.start_date);
        r.days = u.at("days").get<int>();
        index.emplace(r.user_id, run.users.size());
        run.users.push_back(std::move(r));
    }

    for (auto& x : read_events(dir / kEventsFile)) {
        auto it = index.find(x.user_id);
        if (it == index.end()) throw RunFormatError("events.jsonl names unknown user " + x.user_id);
        run.users[it->second].events.push_back(std::move(x.event));
    }
    if (with_snapshots) {
        const auto file = dir / kSnapshotsFile;
        for_each_line(file, [&](const std::string& line, std::size_t n) {
            auto j = parse_line(line, file, n);
            auto it = index.find(j.at("user_id").get<std::string>());
            if (it == index.end()) throw RunFormatError(fmt::format("{}:{}: unknown user", file.string(), n));
            run.users[it->second].snapshots.push_back(snapshot_from_json(j));
        });
    }
    return run;
}

}  // namespace ledgerloop
