#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "rarelearn/tree.hpp"

namespace {

using namespace rarelearn;

void BM_grow(benchmark::State& state) {
    Dataset ds = bench::make_dataset(static_cast<std::size_t>(state.range(0)), 0.1, 7);
    for (auto _ : state) {
        Tree t = grow(ds, {}, {});
        benchmark::DoNotOptimize(t.n_leaves);
    }
}
BENCHMARK(BM_grow)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_prune(benchmark::State& state) {
    Dataset ds = bench::make_dataset(static_cast<std::size_t>(state.range(0)), 0.1, 7);
    Tree t = grow(ds, {}, {});
    for (auto _ : state) {
        Tree p = prune(t, 0.001);
        benchmark::DoNotOptimize(p.n_leaves);
    }
}
BENCHMARK(BM_prune)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace
