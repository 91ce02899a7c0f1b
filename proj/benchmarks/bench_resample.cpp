#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "rarelearn/imbalance.hpp"

namespace {

using namespace rarelearn;

void BM_smote(benchmark::State& state) {
    Dataset ds = bench::make_dataset(static_cast<std::size_t>(state.range(0)), 0.05, 7);
    SmoteConfig cfg;
    cfg.seed = 11;
    for (auto _ : state) {
        ResampleOutcome r = smote(ds, cfg);
        benchmark::DoNotOptimize(r.dataset.n_rows());
    }
}
BENCHMARK(BM_smote)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_under(benchmark::State& state) {
    Dataset ds = bench::make_dataset(static_cast<std::size_t>(state.range(0)), 0.05, 7);
    for (auto _ : state) {
        ResampleOutcome r = random_under_sample(ds, 11);
        benchmark::DoNotOptimize(r.dataset.n_rows());
    }
}
BENCHMARK(BM_under)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace
