#include "whitefem/kernels.hpp"

#include "whitefem/error.hpp"

#include <omp.h>

#include <exception>
#include <limits>
#include <mutex>
#include <vector>

namespace whitefem {

int effective_workers(const ExecutionPolicy& policy) {
    if (policy.mode == Execution::Serial) return 1;
    return policy.workers > 0 ? policy.workers : omp_get_max_threads();
}

void parallel_for(const ExecutionPolicy& policy, std::size_t n, const std::function<void(std::size_t)>& body) {
    if (policy.mode == Execution::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::mutex guard;
    std::exception_ptr first;
    std::size_t first_index = std::numeric_limits<std::size_t>::max();
    const int threads = effective_workers(policy);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

double pairwise_sum(const double* values, std::size_t n, std::size_t stride) {
    constexpr std::size_t block = 16;
    if (n <= block) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += values[i * stride];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values, half, stride) + pairwise_sum(values + half * stride, n - half, stride);
}

double pairwise_sum(std::span<const double> values) { return pairwise_sum(values.data(), values.size(), 1); }

double separable_inverse_square_sum(std::span<const double> ax, std::span<const double> mx,
                                    std::span<const double> ay, std::span<const double> my, double shift,
                                    const ExecutionPolicy& policy) {
    if (ax.size() != mx.size() || ay.size() != my.size())
        throw InvalidArgument("separable_inverse_square_sum: mismatched lengths");
    std::vector<double> rows(ax.size());
    parallel_for(policy, ax.size(), [&](std::size_t i) {
        std::vector<double> terms(ay.size());
        for (std::size_t j = 0; j < ay.size(); ++j) {
            const double d = mx[i] + my[j] + shift;
            terms[j] = ay[j] / (d * d);
        }
        rows[i] = ax[i] * pairwise_sum(terms);
    });
    return pairwise_sum(rows);
}

}  // namespace whitefem
