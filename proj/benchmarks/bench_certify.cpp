#include <benchmark/benchmark.h>

#include "diffcert/certify.hpp"

using namespace diffcert;

namespace {

void BM_ProfileBuild(benchmark::State& state) {
    const auto m = std::make_shared<const dsl::ModelSpec>(
        dsl::catalog("polynomial_drift", {{"K", 1.0}, {"kappa", 2.0}, {"d", 1.0}}));
    const int nodes = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const auto p = radial::build_profile(m, 8.0, nodes, {});
        benchmark::DoNotOptimize(p.I.data());
    }
}
BENCHMARK(BM_ProfileBuild)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_CertifyExample3(benchmark::State& state) {
    const auto m = std::make_shared<const dsl::ModelSpec>(dsl::catalog(
        "langevin_tempered", {{"alpha", 0.2}, {"beta", 0.3}, {"c", 1.0}, {"d", 1.0}}));
    for (auto _ : state) {
        const auto cert = certify::certify_model(m, {});
        benchmark::DoNotOptimize(cert.lambda_est);
    }
}
BENCHMARK(BM_CertifyExample3)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
