#include <benchmark/benchmark.h>

#include "diffcert/rng.hpp"

using namespace diffcert;

namespace {

void BM_NormalDraw(benchmark::State& state) {
    const rng::Stream s = rng::Stream::derive(1, 2);
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(s.normal_at(i++));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalDraw);

void BM_StableDraw(benchmark::State& state) {
    const rng::Stream s = rng::Stream::derive(3, 4);
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng::stable_positive(0.5, s.u01_at(2 * i), s.exp_at(2 * i + 1)));
        ++i;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StableDraw);

} // namespace
