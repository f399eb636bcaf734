#include "whitefem/error.hpp"
#include "whitefem/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace whitefem;

TEST_CASE("pairwise summation") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum(std::span<const double>()) == 0.0);
    std::vector<double> strided{1, 100, 2, 100, 3, 100};
    CHECK(pairwise_sum(strided.data(), 3, 2) == 6.0);

    // ill-conditioned: naive left-to-right summation loses the small terms
    std::vector<double> w(1 << 20, 1e-16);
    w[0] = 1.0;
    CHECK(pairwise_sum(w) == doctest::Approx(1.0 + 1e-16 * ((1 << 20) - 1)).epsilon(1e-15));
}

TEST_CASE("parallel_for covers every index once") {
    for (auto policy : {ExecutionPolicy::serial(), ExecutionPolicy::openmp(1), ExecutionPolicy::openmp(4)}) {
        std::vector<int> hits(5000, 0);
        parallel_for(policy, hits.size(), [&](std::size_t i) { hits[i] += 1; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
    CHECK(effective_workers(ExecutionPolicy::serial()) == 1);
    CHECK(effective_workers(ExecutionPolicy::openmp(3)) == 3);
}

TEST_CASE("parallel_for rethrows the smallest failing index") {
    for (auto policy : {ExecutionPolicy::serial(), ExecutionPolicy::openmp(4)}) {
        try {
            parallel_for(policy, 100, [](std::size_t i) {
                if (i == 17 || i == 63) throw std::runtime_error(std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "17");
        }
    }
}

TEST_CASE("separable sum is identical across policies") {
    std::vector<double> ax(300), mx(300), ay(200), my(200);
    for (std::size_t i = 0; i < ax.size(); ++i) {
        ax[i] = std::cos(0.1 * i) * std::cos(0.1 * i);
        mx[i] = 0.37 * i * i;
    }
    for (std::size_t j = 0; j < ay.size(); ++j) {
        ay[j] = 1.0 / (1.0 + j);
        my[j] = 1.3 * j * j;
    }
    const double s = separable_inverse_square_sum(ax, mx, ay, my, 1.0, ExecutionPolicy::serial());
    CHECK(s == separable_inverse_square_sum(ax, mx, ay, my, 1.0, ExecutionPolicy::openmp(4)));
    double ref = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i)
        for (std::size_t j = 0; j < ay.size(); ++j) ref += ax[i] * ay[j] / std::pow(mx[i] + my[j] + 1.0, 2);
    CHECK(s == doctest::Approx(ref).epsilon(1e-13));
}
