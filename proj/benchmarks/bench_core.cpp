#include <benchmark/benchmark.h>

#include "ledgerloop/engine.hpp"
#include "ledgerloop/features.hpp"

using namespace ledgerloop;

namespace {

const std::vector<AugmentedPersona>& sample() {
    static const auto personas = load_personas(std::string(LEDGERLOOP_SOURCE_DIR) + "/data/sample_personas.jsonl");
    return personas;
}

TransactionEvent purchase(Date d, std::int64_t cents) {
    TransactionEvent e;
    e.timestamp = {d, 12 * 60};
    e.merchant_name = "Corner Market";
    e.merchant_type = "Convenience Store";
    e.amount = Money::from_cents(cents);
    e.category = "retail";
    return e;
}

LedgerState state_for(Date d) {
    LedgerState s;
    s.cash = Money::from_cents(500000);
    s.credit_limit = Money::from_cents(950000);
    s.current_date = d;
    return s;
}

void BM_apply_event(benchmark::State& st) {
    const Date d = Date::from_ymd(2024, 3, 12);
    auto s = state_for(d);
    for (auto _ : st) {
        s = apply_event(s, purchase(d, 125));
        if (s.available_credit().cents() < 1000) s.credit_balance = {};
        benchmark::DoNotOptimize(s.history_digest);
    }
}
BENCHMARK(BM_apply_event);

void BM_evaluate_plan(benchmark::State& st) {
    EngineConfig config;
    const auto registry = make_registry(config);
    const Date d = Date::from_ymd(2024, 3, 12);
    const auto s = state_for(d);
    std::vector<TransactionEvent> plan;
    for (int i = 0; i < st.range(0); ++i) plan.push_back(purchase(d, 500 + i));
    for (auto _ : st) benchmark::DoNotOptimize(registry.evaluate_plan(s, plan));
}
BENCHMARK(BM_evaluate_plan)->Arg(4)->Arg(16);

void BM_simulate_user(benchmark::State& st) {
    EngineConfig config;
    config.max_days = static_cast<int>(st.range(0));
    const auto registry = make_registry(config);
    for (auto _ : st) {
        MockProposer proposer(config);
        benchmark::DoNotOptimize(simulate_user(sample().front(), config, registry, proposer, false));
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_simulate_user)->Arg(90)->Arg(365)->Unit(benchmark::kMillisecond);

void BM_encode(benchmark::State& st) {
    EngineConfig config;
    config.max_days = 180;
    const auto registry = make_registry(config);
    MockProposer proposer(config);
    const auto trace = simulate_user(sample().front(), config, registry, proposer, false);
    const auto vocab = build_vocab(trace.events, 2);
    for (auto _ : st)
        for (const auto& e : trace.events) benchmark::DoNotOptimize(encode_event(e, vocab).dense(vocab));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(trace.events.size()));
}
BENCHMARK(BM_encode);

}  // namespace

BENCHMARK_MAIN();
