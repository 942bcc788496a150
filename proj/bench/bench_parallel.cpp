// Serial vs OpenMP versions of the heavy kernels. Run with UBMLAB_WORKERS or
// OMP_NUM_THREADS set to choose the parallel worker count.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "ubmlab/determinantal.hpp"
#include "ubmlab/estimate.hpp"
#include "ubmlab/fisher_hartwig.hpp"
#include "ubmlab/spectral.hpp"
#include "ubmlab/unitary_dynamics.hpp"

using namespace ubmlab;

namespace {

std::vector<double> cue_sample_row(const SeedTree& s, int n) {
    const auto phases = cue_eigenphases(n, s);
    double c = 0.0;
    for (double p : phases) c += std::cos(p);
    return {c};
}

template <bool Serial>
void BM_CollectSamples(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const SeedTree seed(1);
    const SampleFn fn = [n](const SeedTree& s) { return cue_sample_row(s, n); };
    for (auto _ : state) {
        auto t = Serial ? collect_samples_serial(seed, 256, 1, fn) : collect_samples(seed, 256, 1, fn);
        benchmark::DoNotOptimize(t.data.data());
    }
}

FredholmProblem two_time_problem(int n) {
    FredholmProblem p;
    p.n = n;
    p.times = {0.0, 0.3, 0.7};
    for (int j = 0; j < 3; ++j) p.tests.push_back(arc_indicator_test(0.2 * j, 0.2 * j + 1.5, -0.5));
    p.quadrature_m = std::max(256, 16 * n);
    return p;
}

template <bool Serial>
void BM_Fredholm(benchmark::State& state) {
    const auto p = two_time_problem(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto r = Serial ? fredholm_expectation_serial(p) : fredholm_expectation(p);
        benchmark::DoNotOptimize(r.value);
    }
}

CircleSymbol smooth_symbol(int k_max) {
    CircleSymbol f(k_max);
    for (int k = -k_max; k <= k_max; ++k) f.set_coeff(k, std::exp(-0.5 * std::abs(k)) / (1.0 + k * k));
    return f;
}

template <bool Serial>
void BM_Toeplitz(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto f = smooth_symbol(40);
    for (auto _ : state) {
        auto r = Serial ? toeplitz_determinant_serial(f, n) : toeplitz_determinant(f, n);
        benchmark::DoNotOptimize(r.log_abs);
    }
}

template <bool Serial>
void BM_Field(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const SeedTree seed(3);
    const auto traj = evolve_eigenphases(cue_eigenphases(n, seed.child("start")), 1e-3, 200, 2.0, seed.child("path"), 4);
    std::vector<double> angles(256);
    for (std::size_t a = 0; a < angles.size(); ++a) angles[a] = 2.0 * std::numbers::pi * (a + 0.5) / angles.size();
    for (auto _ : state) {
        auto f = Serial ? field_from_trajectory_serial(traj, angles) : field_from_trajectory(traj, angles);
        benchmark::DoNotOptimize(f.values.data());
    }
}

}  // namespace

BENCHMARK(BM_CollectSamples<true>)->Name("collect_samples/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CollectSamples<false>)->Name("collect_samples/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fredholm<true>)->Name("fredholm/serial")->Arg(8)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fredholm<false>)->Name("fredholm/parallel")->Arg(8)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Toeplitz<true>)->Name("toeplitz/serial")->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Toeplitz<false>)->Name("toeplitz/parallel")->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Field<true>)->Name("field/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Field<false>)->Name("field/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
