#include <benchmark/benchmark.h>

#include "agar/codec.hpp"
#include "agar/rng.hpp"

using namespace agar;

static void BM_Lz78Random(benchmark::State& state) {
    BitString x = random_bits(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        auto rep = lz78_codelength(x);
        benchmark::DoNotOptimize(rep.bits_x64);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Lz78Random)->RangeMultiplier(4)->Range(1 << 10, 1 << 18);

static void BM_LzwRandom(benchmark::State& state) {
    BitString x = random_bits(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        auto rep = lzw_codelength(x);
        benchmark::DoNotOptimize(rep.bits_x64);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LzwRandom)->RangeMultiplier(4)->Range(1 << 10, 1 << 18);

static void BM_MixtureRandom(benchmark::State& state) {
    BitString x = random_bits(static_cast<std::size_t>(state.range(0)), 3);
    MixtureModelClass cls{static_cast<unsigned>(state.range(1))};
    for (auto _ : state) {
        auto rep = mixture_codelength(x, cls);
        benchmark::DoNotOptimize(rep.bits_x64);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MixtureRandom)->Args({1 << 14, 4})->Args({1 << 14, 8})->Args({1 << 14, 12});

static void BM_MutualInfoInterleave(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    BitString x = random_bits(n, 4);
    BitString y = random_bits(n, 5);
    auto est = make_estimator(EstimatorSpec::parse("lz78"));
    for (auto _ : state) {
        auto m = mutual_info_x64(x, y, est);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_MutualInfoInterleave)->Arg(1 << 13)->Arg(1 << 15);

BENCHMARK_MAIN();
