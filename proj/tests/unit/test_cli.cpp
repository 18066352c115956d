#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "ledgerloop/corpus_io.hpp"
#include "ledgerloop/engine.hpp"
#include "ledgerloop/tasks.hpp"

using namespace ledgerloop;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ledgerloop");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path only_run(const fs::path& root) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) dirs.push_back(e.path());
    REQUIRE(dirs.size() == 1);
    return dirs.front();
}

const std::string kPersonas = (test::source_dir() / "data" / "sample_personas.jsonl").string();

fs::path generate_into(const fs::path& root, const std::string& jobs = "1") {
    auto r = invoke({"generate", "--personas", kPersonas, "--out", root.string(), "--max-users", "6", "--set",
                     "max_days=150", "--jobs", jobs});
    INFO(r.err);
    REQUIRE(r.code == 0);
    return only_run(root);
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"generate"}).code == 2);
    CHECK(invoke({"verify", "--run", "/definitely/not/here"}).code == 2);
    CHECK(invoke({"build-task", "sideways", "--run", "."}).code == 2);
    const auto bad_set = invoke({"generate", "--personas", kPersonas, "--out", test::scratch_dir("cli-badset").string(),
                                 "--set", "no_such_key=1"});
    CHECK(bad_set.code == 2);
    CHECK(invoke({"--help"}).code == 0);
    const auto v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(std::string(library_version())) != std::string::npos);
}

TEST_CASE("generate is byte-identical across invocations and job counts") {
    const auto a = generate_into(test::scratch_dir("cli-gen-a"));
    const auto b = generate_into(test::scratch_dir("cli-gen-b"), "3");
    CHECK(a.filename() == b.filename());
    for (auto f : {kEventsFile, kAuditFile, kSnapshotsFile, kPersonasFile})
        CHECK(slurp(a / f) == slurp(b / f));
    auto ma = nlohmann::json::parse(slurp(a / kManifestFile));
    auto mb = nlohmann::json::parse(slurp(b / kManifestFile));
    CHECK(ma["config_hash"] == mb["config_hash"]);
    CHECK(ma["users"] == mb["users"]);
}

TEST_CASE("verify and replay report findings with exit code 1") {
    const auto run = generate_into(test::scratch_dir("cli-verify"));
    auto v = invoke({"verify", "--run", run.string()});
    CHECK(v.code == 0);
    CHECK(v.out.find("clean") != std::string::npos);
    auto r = invoke({"replay", "--run", run.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("6 reproduced, 0 diverged") != std::string::npos);

    // Drop the last exported event.
    auto text = slurp(run / kEventsFile);
    text.pop_back();
    text.erase(text.rfind('\n') + 1);
    std::ofstream(run / kEventsFile, std::ios::trunc | std::ios::binary) << text;
    CHECK(invoke({"verify", "--run", run.string()}).code == 1);

    // Rewrite one audited amount.
    auto audit = slurp(run / kAuditFile);
    const auto pos = audit.find("\"amount\":\"");
    REQUIRE(pos != std::string::npos);
    const auto digit = audit.find_first_of("123456789", pos + 10);
    audit[digit] = audit[digit] == '9' ? '8' : static_cast<char>(audit[digit] + 1);
    std::ofstream(run / kAuditFile, std::ios::trunc | std::ios::binary) << audit;
    r = invoke({"replay", "--run", run.string()});
    CHECK(r.code == 1);
    CHECK(r.out.find("1 diverged") != std::string::npos);
}

TEST_CASE("build-task, encode and stats") {
    const auto run = generate_into(test::scratch_dir("cli-tasks"));
    const auto task_file = run / "theft.jsonl";
    auto b = invoke({"build-task", "theft", "--run", run.string(), "--n-months", "1", "--out", task_file.string()});
    INFO(b.err);
    REQUIRE(b.code == 0);
    CHECK(fs::exists(run / "theft.manifest.json"));

    const auto data = load_run(run, false);
    const auto examples = read_task(task_file);
    REQUIRE_FALSE(examples.empty());
    for (const auto& x : examples) {
        REQUIRE(x.event_labels.size() == x.events.size());
        std::vector<TransactionEvent> kept;
        for (std::size_t i = 0; i < x.events.size(); ++i)
            if (x.event_labels[i] == 0) kept.push_back(x.events[i]);
        std::vector<TransactionEvent> own;
        for (const auto& e : data.find(x.user_id)->events)
            if (e.timestamp.date >= x.window_start && e.timestamp.date < x.window_end) own.push_back(e);
        CHECK(kept == own);
    }

    auto ill = invoke({"build-task", "illiquidity", "--run", run.string(), "--n-months", "2", "--horizon-days", "30"});
    CHECK(ill.code == 0);
    CHECK(fs::exists(run / "tasks" / "illiquidity-n2.jsonl"));
    CHECK(invoke({"build-task", "theft", "--run", run.string(), "--split", "train"}).code == 2);

    auto e = invoke({"encode", "--task", task_file.string(), "--vocab-threshold", "0"});
    INFO(e.err);
    REQUIRE(e.code == 0);
    const auto header = nlohmann::json::parse(slurp(run / "theft.features.json"));
    CHECK(header["label"] == "event");
    std::size_t total = 0;
    for (const auto& x : examples) total += x.events.size();
    CHECK(header["rows"] == total);
    const auto vocab = nlohmann::json::parse(slurp(run / "theft.vocab.json"));
    CHECK(vocab["threshold"] == 0);

    auto s = invoke({"stats", "--run", run.string()});
    CHECK(s.code == 0);
    for (auto name : {"group_education_level.csv", "group_weekday.csv", "utilization.csv", "summary.txt"})
        CHECK(fs::exists(run / "stats" / name));
    CHECK(s.out.find("daily transactions") != std::string::npos);
}

TEST_CASE("derive-profiles heuristic") {
    const auto raw = (test::source_dir() / "data" / "sample_personas_raw.jsonl").string();
    const auto out = test::scratch_dir("cli-derive") / "augmented.jsonl";
    auto r = invoke({"derive-profiles", "--personas", raw, "--out", out.string(), "--seed", "7"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto personas = load_personas(out);
    CHECK_FALSE(personas.empty());
    auto again = invoke({"derive-profiles", "--personas", raw, "--seed", "7"});
    CHECK(again.code == 0);
    CHECK(again.out == slurp(out));
    CHECK(invoke({"derive-profiles", "--personas", raw, "--mode", "oracle"}).code == 2);
}
