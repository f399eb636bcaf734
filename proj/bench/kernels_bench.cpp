// Serial reference paths against the OpenMP kernels. Both modes produce
// bit-identical results; only the wall time differs.

#include "whitefem/convergence.hpp"
#include "whitefem/spectral.hpp"
#include "whitefem/stochastic.hpp"
#include "whitefem/white_noise.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace whitefem;

namespace {

constexpr double pi = std::numbers::pi;

ExecutionPolicy policy_of(const benchmark::State& state) {
    return state.range(0) == 0 ? ExecutionPolicy::serial() : ExecutionPolicy::openmp();
}

MeshPtr square(int n) { return std::make_shared<const Mesh>(build_rectangle_mesh(pi, pi, n, n)); }

void box_covariance(benchmark::State& state) {
    const auto dom = ModelDomain::rectangle(pi, pi);
    const auto policy = policy_of(state);
    for (auto _ : state) {
        auto v = covariance_function(dom, BoundaryCondition::neumann(), {pi / 2, pi / 2}, {pi / 2, pi / 2}, 1.0,
                                     static_cast<std::size_t>(state.range(1)), policy);
        benchmark::DoNotOptimize(v.value);
    }
}

void path_batch(benchmark::State& state) {
    const DiscreteSolutionOperator op(square(static_cast<int>(state.range(1))), BoundaryCondition::neumann(), 1.0);
    const std::vector<Point> pts{{pi / 2, pi / 2}, {1.0, 2.0}};
    const auto policy = policy_of(state);
    for (auto _ : state) {
        auto v = sample_point_values(op, pts, 256, 1, 0, policy);
        benchmark::DoNotOptimize(v.data());
    }
}

void variance_field(benchmark::State& state) {
    const DiscreteSolutionOperator op(square(static_cast<int>(state.range(1))), BoundaryCondition::neumann(), 1.0);
    const auto policy = policy_of(state);
    for (auto _ : state) {
        auto v = pointwise_variance_field(op, policy);
        benchmark::DoNotOptimize(v.coefficients().data());
    }
}

void fem_error(benchmark::State& state) {
    const auto dom = ModelDomain::rectangle(pi, pi);
    const auto mesh = square(static_cast<int>(state.range(1)));
    FemErrorOptions opts;
    opts.policy = policy_of(state);
    for (auto _ : state) {
        auto e = fem_error_level(dom, mesh, BoundaryCondition::neumann(), 1.0, 1.1, opts);
        benchmark::DoNotOptimize(e.error_sq);
    }
}

}  // namespace

// first argument: 0 serial, 1 OpenMP
BENCHMARK(box_covariance)->ArgsProduct({{0, 1}, {1000, 4000}})->Unit(benchmark::kMillisecond);
BENCHMARK(path_batch)->ArgsProduct({{0, 1}, {16, 32}})->Unit(benchmark::kMillisecond);
BENCHMARK(variance_field)->ArgsProduct({{0, 1}, {16, 32}})->Unit(benchmark::kMillisecond);
BENCHMARK(fem_error)->ArgsProduct({{0, 1}, {8, 16}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
