#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ledgerloop/analytics.hpp"
#include "ledgerloop/audit.hpp"
#include "ledgerloop/corpus_io.hpp"
#include "ledgerloop/engine.hpp"
#include "ledgerloop/features.hpp"
#include "ledgerloop/profile.hpp"
#include "ledgerloop/proposer.hpp"
#include "ledgerloop/tasks.hpp"

namespace ledgerloop::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerateArgs {
    std::string personas;
    std::string config;
    std::string preset;
    std::string out = "runs";
    std::string backend = "mock";
    std::string log_llm;
    std::vector<std::string> overrides;
    int jobs = 1;
    std::size_t max_users = 0;
};

struct TaskArgs {
    std::string task;
    std::string run;
    std::string out;
    std::string split = "train=0.8,test=0.2";
    int n_months = 3;
    int stride_months = 1;
    std::optional<int> horizon_days;
    std::uint64_t seed = 42;
};

struct EncodeArgs {
    std::string task;
    std::string out;
    std::size_t threshold = 50;
};

struct StatsArgs {
    std::string run;
    std::string out;
    std::size_t threshold = 50;
};

struct DeriveArgs {
    std::string personas;
    std::string mode = "heuristic";
    std::string out;
    std::string config;
    std::string log_llm;
    std::uint64_t seed = 42;
};

std::unique_ptr<std::ofstream> open_log(const std::string& path) {
    if (path.empty()) return nullptr;
    auto out = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*out) throw UsageError("cannot open LLM log " + path);
    return out;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    auto personas = load_personas(a.personas);
    if (a.max_users > 0 && personas.size() > a.max_users) personas.resize(a.max_users);
    std::vector<std::string> overrides;
    if (!a.preset.empty()) overrides.push_back("preset=" + a.preset);
    overrides.insert(overrides.end(), a.overrides.begin(), a.overrides.end());
    const EngineConfig config = load_config(a.config, overrides);
    const RuleRegistry registry = make_registry(config);

    auto log_file = open_log(a.log_llm);
    std::unique_ptr<LlmLog> log = log_file ? std::make_unique<LlmLog>(*log_file) : nullptr;
    ProposerFactory factory;
    if (a.backend == "mock") {
        factory = [&config] { return std::make_unique<MockProposer>(config); };
    } else if (a.backend == "external") {
        auto client = std::make_shared<HttpChatClient>(config.external, log.get());
        factory = [client, &config] { return std::make_unique<ExternalProposer>(client, config); };
    } else {
        throw UsageError("--backend must be mock or external");
    }

    CorpusOptions options{a.out, a.backend, a.jobs};
    auto m = run_corpus(personas, config, registry, factory, options);
    out << fmt::format("run: {}\nusers: {}\nevents: {} ({} exported)\nilliquid: {}\nincomplete: {}\nseconds: {:.2f}\n",
                       m.run_dir.string(), m.users.size(), m.total_events, m.total_exported, m.illiquid, m.incomplete,
                       m.json["execution"]["seconds"].get<double>());
    return kOk;
}

int cmd_replay(const std::string& run_dir, std::ostream& out) {
    const fs::path dir = run_dir;
    auto run = load_run(dir, false);
    auto records = read_audit(dir / kAuditFile);
    std::map<std::string, std::vector<AuditRecord>> by_user;
    for (auto& r : records) by_user[r.user_id].push_back(std::move(r));

    std::size_t ok = 0, bad = 0;
    for (const auto& u : run.manifest.at("users")) {
        const auto id = u.at("user_id").get<std::string>();
        const auto expected = u.at("final_state_hash").get<std::string>();
        const auto& list = by_user[id];
        auto initial = initial_state(list);
        if (!initial) {
            out << fmt::format("{}: no INIT record\n", id);
            ++bad;
            continue;
        }
        try {
            const auto final_hash = hex64(state_hash(replay(list, *initial)));
            if (final_hash != expected) {
                out << fmt::format("{}: replayed final hash {} != recorded {}\n", id, final_hash, expected);
                ++bad;
            } else {
                ++ok;
            }
        } catch (const ReplayDivergence& e) {
            out << fmt::format("{}: divergence at record {}: {}\n", id, e.index(), e.what());
            ++bad;
        }
    }
    out << fmt::format("replayed {} users: {} reproduced, {} diverged\n", ok + bad, ok, bad);
    return bad == 0 ? kOk : kFindings;
}

int cmd_verify(const std::string& run_dir, std::ostream& out) {
    const fs::path dir = run_dir;
    auto run = load_run(dir, false);
    const auto registry = make_registry(run.config);
    auto report = verify(read_audit(dir / kAuditFile), read_events(dir / kEventsFile), registry,
                         read_snapshot_lines(dir / kSnapshotsFile));
    out << format_report(report);
    return report.clean() ? kOk : kFindings;
}

std::vector<std::pair<std::string, double>> parse_split(const std::string& text) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--split expects name=ratio[,name=ratio...]");
        try {
            out.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
        } catch (const std::exception&) {
            throw UsageError("--split ratio is not a number: " + item);
        }
    }
    return out;
}

int cmd_build_task(const TaskArgs& a, std::ostream& out) {
    auto kind = parse_task_kind(a.task);
    if (!kind) throw UsageError("task must be illiquidity or theft");
    auto run = load_run(a.run, false);
    BuildReport report;
    std::vector<TaskExample> examples;
    if (*kind == TaskKind::illiquidity)
        examples = build_illiquidity_examples(run, {a.n_months, a.horizon_days, a.stride_months}, &report);
    else
        examples = build_theft_examples(run, {a.n_months, a.stride_months, a.seed}, &report);
    if (examples.empty()) throw UsageError("no examples: every trace is shorter than the requested window");
    auto parts = split_by_user(std::move(examples), parse_split(a.split), a.seed);

    std::vector<TaskExample> all;
    nlohmann::ordered_json splits = nlohmann::ordered_json::array();
    for (auto& p : parts) {
        splits.push_back({{"name", p.name}, {"users", p.users.size()}, {"examples", p.examples.size()},
                          {"positives", p.positives}, {"labels", p.labels}, {"positive_rate", p.positive_rate()}});
        std::move(p.examples.begin(), p.examples.end(), std::back_inserter(all));
    }
    const fs::path file = a.out.empty() ? fs::path(a.run) / "tasks" / fmt::format("{}-n{}.jsonl", to_string(*kind), a.n_months)
                                        : fs::path(a.out);
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_task(file, all);

    nlohmann::ordered_json m;
    m["task"] = to_string(*kind);
    m["run"] = a.run;
    m["config_hash"] = run.manifest.value("config_hash", "");
    m["n_months"] = a.n_months;
    m["stride_months"] = a.stride_months;
    m["horizon_days"] = a.horizon_days ? nlohmann::ordered_json(*a.horizon_days) : nlohmann::ordered_json("end_of_trace");
    m["seed"] = a.seed;
    m["examples"] = report.examples;
    m["users"] = report.users_used;
    m["users_too_short"] = report.users_too_short;
    m["users_incomplete"] = report.users_incomplete;
    m["infeasible_injections"] = report.infeasible_injections;
    m["positives"] = report.positives;
    m["labels"] = report.labels;
    m["positive_rate"] = report.labels == 0 ? 0.0 : static_cast<double>(report.positives) / static_cast<double>(report.labels);
    m["splits"] = splits;
    m["reference"] = *kind == TaskKind::illiquidity
                         ? nlohmann::ordered_json{{"positive_rate_n3", 0.0343}, {"events_per_window_n3", 163}}
                         : nlohmann::ordered_json{{"positive_rate_n3", 0.0113}};
    fs::path manifest = file;
    manifest.replace_extension(".manifest.json");
    write_file_atomic(manifest, m.dump(2) + "\n");

    out << fmt::format("task: {}\nexamples: {} from {} users ({} too short, {} incomplete)\npositive rate: {:.4f}\n",
                       file.string(), report.examples, report.users_used, report.users_too_short,
                       report.users_incomplete, m["positive_rate"].get<double>());
    for (const auto& s : splits)
        out << fmt::format("  {}: {} users, {} examples, positive rate {:.4f}\n", s["name"].get<std::string>(),
                           s["users"].get<std::size_t>(), s["examples"].get<std::size_t>(),
                           s["positive_rate"].get<double>());
    return kOk;
}

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
    auto examples = read_task(a.task);
    const Vocab vocab = build_vocab(training_events(examples), a.threshold);
    const fs::path dir = a.out.empty() ? fs::path(a.task).parent_path() : fs::path(a.out);
    if (!dir.empty()) fs::create_directories(dir);
    const std::string stem = fs::path(a.task).stem().string();

    std::ofstream csv(dir / (stem + ".features.csv"), std::ios::binary | std::ios::trunc);
    if (!csv) throw UsageError("cannot write features to " + dir.string());
    nlohmann::ordered_json header;
    header["task"] = a.task;
    header["format"] = "csv";
    auto summary = write_features(examples, vocab, csv, header);
    csv.close();
    write_file_atomic(dir / (stem + ".features.json"), header.dump(2) + "\n");
    write_file_atomic(dir / (stem + ".vocab.json"), to_json(vocab).dump(2) + "\n");
    out << fmt::format("rows: {}\ndims: {} ({} names + {} types + 2)\noutput: {}\n", summary.rows, summary.dims,
                       vocab.name_dims(), vocab.type_dims(), (dir / (stem + ".features.csv")).string());
    return kOk;
}

int cmd_stats(const StatsArgs& a, std::ostream& out) {
    auto run = load_run(a.run, true);
    const fs::path dir = a.out.empty() ? fs::path(a.run) / "stats" : fs::path(a.out);
    fs::create_directories(dir);
    for (auto key : all_group_keys()) {
        std::ofstream f(dir / fmt::format("group_{}.csv", to_string(key)), std::ios::trunc);
        write_group_csv(f, key, group_stats(run, key));
    }
    {
        std::ofstream f(dir / "utilization.csv", std::ios::trunc);
        write_utilization_csv(f, run);
    }
    const auto text = format_summary(summarize(run, a.threshold));
    write_file_atomic(dir / "summary.txt", text);
    out << text << fmt::format("\ntables: {}\n", dir.string());
    return kOk;
}

int cmd_derive(const DeriveArgs& a, std::ostream& out) {
    ProfileMode mode;
    if (a.mode == "heuristic")
        mode = ProfileMode::heuristic;
    else if (a.mode == "external")
        mode = ProfileMode::external;
    else
        throw UsageError("--mode must be heuristic or external");

    auto records = load_persona_records(a.personas);
    auto log_file = open_log(a.log_llm);
    std::unique_ptr<LlmLog> log = log_file ? std::make_unique<LlmLog>(*log_file) : nullptr;
    std::unique_ptr<HttpChatClient> client;
    if (mode == ProfileMode::external) client = std::make_unique<HttpChatClient>(load_config(a.config).external, log.get());

    std::vector<AugmentedPersona> personas;
    for (auto& r : records) {
        AugmentedPersona p;
        p.user_id = r.user_id;
        p.user_financial_profile = derive_financial_profile(r.persona, mode, a.seed, client.get());
        p.user_persona = std::move(r.persona);
        personas.push_back(std::move(p));
    }
    if (a.out.empty()) {
        for (const auto& p : personas) out << serialize_persona_line(p) << '\n';
    } else {
        write_personas(a.out, personas);
        out << fmt::format("wrote {} personas to {}\n", personas.size(), a.out);
    }
    return kOk;
}

}  // namespace

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rule-checked synthetic credit-card transaction generator"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Simulate a corpus for a persona file");
    generate->add_option("--personas", gen.personas, "Augmented personas (JSONL or JSON array)")->required()->check(CLI::ExistingFile);
    generate->add_option("--config", gen.config, "Engine config JSON")->check(CLI::ExistingFile);
    generate->add_option("--preset", gen.preset, "Base preset: default, stressed, affluent");
    generate->add_option("--out", gen.out, "Output root; the run directory is created inside");
    generate->add_option("--backend", gen.backend, "mock or external")->check(CLI::IsMember({"mock", "external"}));
    generate->add_option("--set", gen.overrides, "Override a config key, e.g. --set max_days=180");
    generate->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
    generate->add_option("--max-users", gen.max_users, "Only the first N personas");
    generate->add_option("--log-llm", gen.log_llm, "Append redacted request/response bodies to this file");

    std::string replay_run;
    auto* replay_cmd = app.add_subcommand("replay", "Re-apply the audit log and compare final state hashes");
    replay_cmd->add_option("--run", replay_run, "Run directory")->required()->check(CLI::ExistingDirectory);

    std::string verify_run;
    auto* verify_cmd = app.add_subcommand("verify", "Check hash chain, export coverage and invariants of a run");
    verify_cmd->add_option("--run", verify_run, "Run directory")->required()->check(CLI::ExistingDirectory);

    TaskArgs task;
    int horizon = 0;
    auto* build = app.add_subcommand("build-task", "Build illiquidity or identity-theft examples from a run");
    build->add_option("task", task.task, "illiquidity or theft")->required()->check(CLI::IsMember({"illiquidity", "theft"}));
    build->add_option("--run", task.run, "Run directory")->required()->check(CLI::ExistingDirectory);
    build->add_option("--n-months", task.n_months, "Context window length in months")->check(CLI::PositiveNumber);
    auto* horizon_opt = build->add_option("--horizon-days", horizon, "Label horizon after the window (default: end of trace)")
                            ->check(CLI::PositiveNumber);
    build->add_option("--stride-months", task.stride_months, "Window stride in months")->check(CLI::PositiveNumber);
    build->add_option("--split", task.split, "Split ratios by user, e.g. train=0.8,test=0.2");
    build->add_option("--seed", task.seed, "Seed for donor choice and the split");
    build->add_option("--out", task.out, "Output task.jsonl path");

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Encode task events as dense feature rows");
    encode->add_option("--task", enc.task, "task .jsonl from build-task")->required()->check(CLI::ExistingFile);
    encode->add_option("--vocab-threshold", enc.threshold, "Index categories seen more than K times in training");
    encode->add_option("--out", enc.out, "Output directory (default: next to the task file)");

    StatsArgs st;
    auto* stats = app.add_subcommand("stats", "Group-by tables, utilization and a corpus summary");
    stats->add_option("--run", st.run, "Run directory")->required()->check(CLI::ExistingDirectory);
    stats->add_option("--out", st.out, "Output directory (default: <run>/stats)");
    stats->add_option("--frequency-threshold", st.threshold, "Merchant frequency threshold for coverage counts");

    DeriveArgs der;
    auto* derive = app.add_subcommand("derive-profiles", "Attach financial profiles to raw personas");
    derive->add_option("--personas", der.personas, "Raw personas (JSONL or JSON array)")->required()->check(CLI::ExistingFile);
    derive->add_option("--mode", der.mode, "heuristic or external")->check(CLI::IsMember({"heuristic", "external"}));
    derive->add_option("--out", der.out, "Output JSONL (default: stdout)");
    derive->add_option("--seed", der.seed, "Seed for heuristic derivation");
    derive->add_option("--config", der.config, "Config with the external endpoint")->check(CLI::ExistingFile);
    derive->add_option("--log-llm", der.log_llm, "Append redacted request/response bodies to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen, out);
        if (replay_cmd->parsed()) return cmd_replay(replay_run, out);
        if (verify_cmd->parsed()) return cmd_verify(verify_run, out);
        if (build->parsed()) {
            if (horizon_opt->count() > 0) task.horizon_days = horizon;
            return cmd_build_task(task, out);
        }
        if (encode->parsed()) return cmd_encode(enc, out);
        if (stats->parsed()) return cmd_stats(st, out);
        if (derive->parsed()) return cmd_derive(der, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const PersonaLoadError& e) {
        err << "persona error: " << e.what() << '\n';
        for (const auto& r : e.errors())
            for (const auto& issue : r.issues) err << fmt::format("  record {}: {}: {}\n", r.line, issue.field, issue.rule);
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace ledgerloop::cli
