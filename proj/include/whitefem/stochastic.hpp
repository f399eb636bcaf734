#pragma once

#include "whitefem/fem.hpp"
#include "whitefem/kernels.hpp"
#include "whitefem/white_noise.hpp"

#include <cstdint>
#include <vector>

namespace whitefem {

/// X_h = A^{-1} b for white-noise loads b ~ N(0, M): the Galerkin system
/// factored once together with the mass factor used to sample loads.
class DiscreteSolutionOperator {
public:
    DiscreteSolutionOperator(MeshPtr mesh, BoundaryCondition bc, double lambda, SolverOptions options = {});

    const Mesh& mesh() const noexcept { return system_.mesh(); }
    const MeshPtr& mesh_ptr() const noexcept { return system_.mesh_ptr(); }
    const BoundaryCondition& bc() const noexcept { return system_.bc(); }
    double lambda() const noexcept { return system_.lambda(); }
    const GalerkinSystem& system() const noexcept { return system_; }
    const FemMatrices& matrices() const noexcept { return system_.matrices(); }
    const MassFactor& mass_factor() const noexcept { return mass_factor_; }

    Vector solve(const Vector& load) const { return system_.solve(load); }

private:
    GalerkinSystem system_;
    MassFactor mass_factor_;
};

/// One path; draws the node count of normals from the stream.
FemFunction sample_path(const DiscreteSolutionOperator& op, GaussianStream& stream);
/// The path driven by given normals z (load L z).
FemFunction path_from_normals(const DiscreteSolutionOperator& op, const Vector& z);

/// p(x)ᵀ A^{-1} M A^{-1} p(y).
double exact_discrete_covariance(const DiscreteSolutionOperator& op, const Point& x, const Point& y);

/// E |X_h(x) - X_h(y)|².
double increment_variance(const DiscreteSolutionOperator& op, const Point& x, const Point& y);

/// Var X_h at every node, one backsolve per node.
FemFunction pointwise_variance_field(const DiscreteSolutionOperator& op, const ExecutionPolicy& policy = {});

/// E ||X_h||²_{L²} = tr(A^{-1} M A^{-1} M).
double expected_l2_norm_sq(const DiscreteSolutionOperator& op, const ExecutionPolicy& policy = {});

/// Sample mean and covariance with Gaussian standard errors.
struct MomentEstimate {
    Vector mean;
    DenseMatrix covariance;
    /// sqrt(C_ii / n).
    Vector mean_se;
    /// sqrt((C_ii C_jj + C_ij²) / (n - 1)).
    DenseMatrix covariance_se;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t base_stream = 0;
};

/// Moments of the rows of `samples` (one sample per row), reduced pairwise.
MomentEstimate sample_moments(const DenseMatrix& samples, const ExecutionPolicy& policy = {});

/// Path values at the points, one row per path; path p uses stream
/// (seed, base_stream + p).
DenseMatrix sample_point_values(const DiscreteSolutionOperator& op, const std::vector<Point>& points, std::size_t n,
                                std::uint64_t seed, std::uint64_t base_stream = 0,
                                const ExecutionPolicy& policy = {});

MomentEstimate monte_carlo_moments(const DiscreteSolutionOperator& op, const std::vector<Point>& points,
                                   std::size_t n, std::uint64_t seed, std::uint64_t base_stream = 0,
                                   const ExecutionPolicy& policy = {});

}  // namespace whitefem
