#include <benchmark/benchmark.h>

#include "diffcert/model.hpp"

using namespace diffcert;

namespace {

const dsl::ModelSpec& example1() {
    static const dsl::ModelSpec m =
        dsl::catalog("polynomial_drift", {{"K", 1.0}, {"kappa", 2.0}, {"d", 1.0}});
    return m;
}

void BM_DriftScalar(benchmark::State& state) {
    const auto& m = example1();
    double x[1] = {1.7};
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.drift_prog[0].eval_checked(x));
        x[0] += 1e-9;
    }
}
BENCHMARK(BM_DriftScalar);

void BM_DriftBatch(benchmark::State& state) {
    const auto& m = example1();
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> xs(n), out(n), scratch(m.drift_prog[0].scratch_size(n));
    for (std::size_t i = 0; i < n; ++i) xs[i] = 0.1 * static_cast<double>(i % 97) - 3.0;
    const double* coords[1] = {xs.data()};
    for (auto _ : state) {
        m.drift_prog[0].eval_batch(coords, n, out.data(), scratch.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_DriftBatch)->Arg(256)->Arg(2048)->Arg(16384);

void BM_Parse(benchmark::State& state) {
    const std::vector<std::string> params = {"K", "kappa", "rho"};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            dsl::parse_expr("-K*x1*abs(x)^(kappa-1)*(cos(x1)+rho)", 1, params));
    }
}
BENCHMARK(BM_Parse);

} // namespace
