// Score computation: serial reference vs OpenMP kernels, incremental update vs rebuild.
#include "fter/crowd.hpp"
#include "fter/minmax.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace fter;

namespace {

/// Synthetic records with `density` of all pairs voted 3 times by a 10% noisy crowd.
VotesGraph voted_graph(std::size_t n, double density, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.num_records = n;
    spec.num_entities = std::max<std::size_t>(1, n / 5);
    spec.seed = seed;
    auto data = make_synthetic_dataset(spec);
    SyntheticCrowd crowd(*data.truth, {0.1, 0.1, seed});
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution pick(density);
    for (RecordIndex i = 0; i < n; ++i)
        for (RecordIndex j = i + 1; j < n; ++j)
            if (pick(rng))
                for (int k = 0; k < 3; ++k) data.graph.add_vote({i, j}, *crowd.answer({i, j}));
    return data.graph;
}

void BM_compute(benchmark::State& state, Execution exec) {
    const auto g = voted_graph(static_cast<std::size_t>(state.range(0)), 0.05, 1);
    for (auto _ : state) benchmark::DoNotOptimize(compute_scores(g, exec));
    state.SetComplexityN(state.range(0));
}

// one new vote per iteration, then bring the scores up to date
void BM_after_vote(benchmark::State& state, bool incremental) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto g = voted_graph(n, 0.05, 2);
    auto m = compute_scores(g);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<RecordIndex> rec(0, static_cast<RecordIndex>(n - 1));
    std::bernoulli_distribution yes(0.2);
    for (auto _ : state) {
        RecordIndex a = rec(rng), b = rec(rng);
        while (a == b) b = rec(rng);
        const Pair p{std::min(a, b), std::max(a, b)};
        g.add_vote(p, yes(rng) ? Answer::yes : Answer::no);
        if (incremental) benchmark::DoNotOptimize(update(g, m, p));
        else m = compute_scores(g);
        benchmark::ClobberMemory();
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_compute, serial, Execution::serial)
    ->RangeMultiplier(2)
    ->Range(64, 512)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_compute, parallel, Execution::parallel)
    ->RangeMultiplier(2)
    ->Range(64, 512)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_after_vote, incremental, true)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_after_vote, rebuild, false)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
