#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "rarelearn/mlp.hpp"

namespace {

using namespace rarelearn;

void BM_train_mlp(benchmark::State& state) {
    Dataset ds = bench::make_dataset(static_cast<std::size_t>(state.range(0)), 0.3, 7);
    MlpConfig cfg;
    cfg.hidden_units = 5;
    cfg.max_iterations = 200;
    cfg.seed = 3;
    for (auto _ : state) {
        MlpModel m = train_mlp(ds, {}, cfg);
        benchmark::DoNotOptimize(m.w2[0]);
    }
}
BENCHMARK(BM_train_mlp)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace
