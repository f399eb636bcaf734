#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace whitefem {

enum class Execution { Serial, OpenMP };

/// How a kernel distributes independent work items. Results never depend on
/// the mode or the worker count: items write private slots and all
/// reductions run afterwards in a fixed order.
struct ExecutionPolicy {
    Execution mode = Execution::OpenMP;
    /// 0 means the OpenMP default.
    int workers = 0;

    static ExecutionPolicy serial() { return {Execution::Serial, 1}; }
    static ExecutionPolicy openmp(int workers = 0) { return {Execution::OpenMP, workers}; }
};

/// Number of threads the policy would use.
int effective_workers(const ExecutionPolicy& policy);

/// Calls body(i) for i in [0, n). Exceptions thrown by the body are
/// rethrown on the calling thread (the one from the smallest index wins).
void parallel_for(const ExecutionPolicy& policy, std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);
double pairwise_sum(const double* values, std::size_t n, std::size_t stride);

/// Σ_i ax[i] Σ_j ay[j] / (mx[i] + my[j] + shift)^2, rows reduced pairwise.
double separable_inverse_square_sum(std::span<const double> ax, std::span<const double> mx,
                                    std::span<const double> ay, std::span<const double> my, double shift,
                                    const ExecutionPolicy& policy);

}  // namespace whitefem
