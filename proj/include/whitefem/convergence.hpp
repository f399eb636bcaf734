#pragma once

#include "whitefem/fem.hpp"
#include "whitefem/kernels.hpp"
#include "whitefem/spectral.hpp"
#include "whitefem/stochastic.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace whitefem {

/// One mesh level of an H^{-r} error study.
struct LevelError {
    double h = 0.0;
    /// Σ_{ℓ<L} (1+μ_ℓ)^{-r} ||(T - T_h) e_ℓ||²_{L²}.
    double error_sq = 0.0;
    /// Bound on the omitted ℓ >= L part.
    double tail_bound = 0.0;
    std::size_t basis_count = 0;
    /// max over the first test loads f = e_ℓ of ||u^f - u_h^f||²_{H¹}.
    double h1_sup = 0.0;
    /// Σ_ℓ (1+μ_ℓ)^{-r-1} over the basis (the embedding H^r -> H^{-1}).
    double hs_factor = 0.0;
    /// hs_factor * h1_sup.
    double upper_bound = 0.0;
    std::size_t unknowns = 0;
};

struct ErrorReport {
    BoundaryCondition bc = BoundaryCondition::neumann();
    double lambda = 1.0;
    double r = 0.0;
    /// Sorted by decreasing h.
    std::vector<LevelError> levels;
    double fitted_rate = 0.0;
    double fit_residual = 0.0;
    std::size_t basis_count = 0;
};

struct FemErrorOptions {
    std::size_t initial_basis = 256;
    std::size_t max_basis = 20000;
    /// Stop doubling once tail <= target_tail * partial sum.
    double target_tail = 0.01;
    /// Refuse when tail > max_tail * partial sum at the cap.
    double max_tail = 0.05;
    /// Test loads used for the H¹ supremum.
    std::size_t h1_modes = 50;
    ExecutionPolicy policy{};
};

/// ||T e - T_h e||²_{L²} for one eigenfunction e with eigenvalue μ, given
/// b = ((e, φ_i)), c = A^{-1} b: 1/(μ+λ)² - 2 bᵀc/(μ+λ) + cᵀMc.
double galerkin_mode_error_sq(double mu, double lambda, double b_dot_c, double c_mass_c);

/// E ||X - X_h||²_{H^{-r}} on one mesh of a model domain.
LevelError fem_error_level(const ModelDomain& domain, const MeshPtr& mesh, const BoundaryCondition& bc,
                           double lambda, double r, const FemErrorOptions& options = {});

/// The same over a mesh family, with the log-log rate fit.
ErrorReport deterministic_fem_error(const ModelDomain& domain, const std::vector<MeshPtr>& meshes,
                                    const BoundaryCondition& bc, double lambda, double r,
                                    const FemErrorOptions& options = {});

struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;
    /// Max absolute residual of the log-log fit.
    double residual = 0.0;
};

/// Least-squares slope of log(value) against log(h) over (h, value) pairs.
RateFit fit_rate(const std::vector<std::pair<double, double>>& levels);

/// E ||X - X^(m)||²_{H^{-r}} = Σ_{k>m} (1+μ_k)^{-r} (μ_k+λ)^{-2}.
SeriesValue truncation_error_closed_form(const EigenBasis& basis, double lambda, double r, std::size_t m);

/// Σ_k (1+μ_k)^{-r-1}.
SeriesValue embedding_hs_factor(const EigenBasis& basis, double r);

struct L2Diagnostic {
    /// Σ_{k<=K} (μ_k+λ)^{-2} for K = 1..size.
    std::vector<double> partial_sums;
    /// E ||X||²_{L²} with tail bound.
    SeriesValue total;
};

L2Diagnostic l2_realization_diagnostic(const EigenBasis& basis, double lambda);

struct HolderFit {
    double alpha = 0.0;
    double c = 0.0;
    double log_c = 0.0;
    double residual = 0.0;
    std::vector<double> separations;
    std::vector<double> increments;
};

/// Fits E|X_h(x) - X_h(y)|² = C |x - y|^{2α} over the pairs.
HolderFit holder_modulus(const DiscreteSolutionOperator& op, const std::vector<std::pair<Point, Point>>& pairs);

}  // namespace whitefem
