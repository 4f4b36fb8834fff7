#include <benchmark/benchmark.h>

#include <cmath>

#include "fracsde/char_system.hpp"
#include "fracsde/fbm.hpp"
#include "fracsde/integrators.hpp"
#include "fracsde/linear_quasi.hpp"
#include "fracsde/time_grid.hpp"

// Per-path and per-solve costs at the grid sizes the experiments actually
// use. Sampler setup (Cholesky factor, circulant eigenvalues) is cached per
// (H, N), so the first iteration pays it and the steady state is what the
// benchmark reports.

using namespace fracsde;

namespace {

constexpr double kHurst = 0.75;
constexpr double kBeta = 0.7;

SampledPath driver(std::size_t n, std::uint64_t seed, FbmMethod method) {
    return sample_fbm({kHurst, TimeGrid(1.0, n), seed, method});
}

void BM_FbmCholesky(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(driver(n, seed++, FbmMethod::cholesky));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FbmCholesky)->Arg(256)->Arg(1024)->Arg(2048)->Complexity();

void BM_FbmCirculant(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(driver(n, seed++, FbmMethod::circulant));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FbmCirculant)->Arg(1024)->Arg(4096)->Arg(16384)->Complexity();

void BM_YoungRiemann(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SampledPath B = driver(n, 42, FbmMethod::cholesky);
    const IntegrandSpec spec{B, MalliavinKernel(), HolderExponent(kBeta)};
    for (auto _ : state)
        benchmark::DoNotOptimize(young_riemann(spec, B, 0.0, 1.0, EvalPoint::mid));
}
BENCHMARK(BM_YoungRiemann)->Arg(1024)->Arg(4096);

void BM_YoungFractional(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SampledPath B = driver(n, 42, FbmMethod::cholesky);
    const IntegrandSpec spec{B, MalliavinKernel(), HolderExponent(kBeta)};
    const FracOrder order = default_frac_order(kBeta, kBeta);
    for (auto _ : state)
        benchmark::DoNotOptimize(young_fractional(spec, B, 0.0, 1.0, order));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_YoungFractional)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

CoefficientSet geometric() {
    CoefficientSet cs;
    cs.b = [](double, double) { return 0.0; };
    cs.b_x = [](double, double) { return 0.0; };
    cs.sigma = [](double, double x) { return x; };
    cs.sigma_x = [](double, double) { return 1.0; };
    cs.sigma_xx = [](double, double) { return 0.0; };
    cs.lipschitz_L = 1.0;
    return cs;
}

void BM_SolveZ(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SampledPath B = driver(n, 42, FbmMethod::cholesky);
    const CoefficientSet cs = geometric();
    const Kernel kernel(kHurst);
    const HolderExponent beta(kBeta);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_z(cs, 1.0, B, kernel, beta));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveZ)->Arg(256)->Arg(512)->Arg(1024)->Complexity();

void BM_InvertGamma(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SampledPath B = driver(n, 42, FbmMethod::cholesky);
    CoefficientSet cs;
    cs.b = [](double, double) { return 0.0; };
    cs.b_x = [](double, double) { return 0.0; };
    cs.sigma = [](double, double x) { return std::sin(x); };
    cs.sigma_x = [](double, double x) { return std::cos(x); };
    cs.sigma_xx = [](double, double x) { return -std::sin(x); };
    cs.lipschitz_L = 1.0;
    const Kernel kernel(kHurst);
    const HolderExponent beta(kBeta);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            invert_gamma(cs, 0.5, B, kernel, beta, 1.0, 1e-8, 40));
}
BENCHMARK(BM_InvertGamma)->Arg(256)->Arg(512);

void BM_SolveQuasilinear(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SampledPath B = driver(n, 42, FbmMethod::cholesky);
    QuasilinearCoeffs qc;
    qc.a1_constant = true;
    qc.a1_value = 0.5;
    qc.a0 = [](double) { return 0.0; };
    qc.b = [](double, double x) { return 0.1 * x; };
    const Kernel kernel(kHurst);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_quasilinear(qc, 1.0, B, kernel));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveQuasilinear)->Arg(256)->Arg(512)->Arg(1024)->Complexity();

} // namespace

BENCHMARK_MAIN();
