#include <benchmark/benchmark.h>

#include "agar/machine.hpp"
#include "agar/micro.hpp"
#include "agar/rng.hpp"
#include "agar/worlds.hpp"

using namespace agar;

static void BM_Enumerate(benchmark::State& state) {
    auto L = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        auto idx = EnumerationIndex::build(L, 10000);
        benchmark::DoNotOptimize(idx.kraft_num());
    }
}
BENCHMARK(BM_Enumerate)->Arg(14)->Arg(16)->Arg(18)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_TailProfiles(benchmark::State& state) {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    for (auto _ : state) {
        std::size_t rows = 0;
        for (const auto& rec : idx.records()) rows += tail_profile(rec.output, idx).size();
        benchmark::DoNotOptimize(rows);
    }
    state.SetLabel(std::to_string(idx.records().size()) + " outputs");
}
BENCHMARK(BM_TailProfiles)->Unit(benchmark::kMillisecond);

static void BM_GarFamily(benchmark::State& state) {
    for (auto _ : state) {
        GarReport rep = gar_bound_check(10, 8, 18, 10000);
        benchmark::DoNotOptimize(rep.pairs.size());
    }
}
BENCHMARK(BM_GarFamily)->Unit(benchmark::kMillisecond);

static void BM_RunCoupledThermostat(benchmark::State& state) {
    ThermostatParams p;
    ThermostatWorld world(p);
    CausalTransducer reg = build_bangbang_regulator(0.5, p);
    auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        Transcript t = run_coupled(world, reg, n);
        benchmark::DoNotOptimize(t.world_readout.size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunCoupledThermostat)->Arg(4096)->Arg(65536);

BENCHMARK_MAIN();
