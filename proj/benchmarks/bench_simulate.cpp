#include <benchmark/benchmark.h>

#include "diffcert/simulate.hpp"

using namespace diffcert;

namespace {

void BM_EmSteps(benchmark::State& state) {
    const auto m = dsl::catalog("polynomial_drift", {{"K", 1.0}, {"kappa", 2.0}, {"d", 1.0}});
    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.checkpoints = {0.064};
    cfg.n_paths = state.range(0);
    cfg.seed = 1;
    for (auto _ : state) {
        const auto e = sim::em_ensemble(m, std::vector<double>{2.0}, cfg);
        benchmark::DoNotOptimize(e.states[0].data());
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths * 64);
}
BENCHMARK(BM_EmSteps)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);

void BM_TvEstimate(benchmark::State& state) {
    const auto m = dsl::make_model("bm", 1, 1, {}, 1.0, {}, {"0"}, {{"1"}});
    sim::SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.checkpoints = {1.0};
    cfg.n_paths = state.range(0);
    cfg.seed = 2;
    const auto a = sim::extract_sample(sim::em_ensemble(m, std::vector<double>{0.0}, cfg, 0), 0);
    const auto b = sim::extract_sample(sim::em_ensemble(m, std::vector<double>{0.0}, cfg, 1), 0);
    for (auto _ : state) benchmark::DoNotOptimize(sim::tv_estimate(a, b).tv);
}
BENCHMARK(BM_TvEstimate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

} // namespace
