#pragma once

#include "whitefem/fem.hpp"
#include "whitefem/spectral.hpp"
#include "whitefem/stochastic.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace whitefem {

enum class BoundaryRepresentation {
    /// Nodal values on the boundary.
    Trace,
    /// Pairings with the boundary hat functions.
    Functional,
};

/// A function or functional on ∂D, one entry per boundary node in the order
/// of Mesh::boundary_nodes().
class BoundaryFunction {
public:
    BoundaryFunction(MeshPtr mesh, Vector values, BoundaryRepresentation representation);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    const Vector& values() const noexcept { return values_; }
    BoundaryRepresentation representation() const noexcept { return representation_; }

    BoundaryFunction operator+(const BoundaryFunction& other) const;
    BoundaryFunction operator-(const BoundaryFunction& other) const;
    BoundaryFunction operator*(double alpha) const;

private:
    void require_compatible(const BoundaryFunction& other) const;

    MeshPtr mesh_;
    Vector values_;
    BoundaryRepresentation representation_;
};

/// Orthonormal arclength Fourier basis of ∂D weighted for H^{-1/2}, with the
/// scale-space weights k^{-2}.
///
/// The boundary loop starts at the lexicographically smallest boundary node
/// and runs counterclockwise. Basis element k (1-based) is ψ_0 = 1/√P for
/// k = 1, then √(2/P) cos(κ_j s), √(2/P) sin(κ_j s) with κ_j = 2πj/P. On an
/// interval the boundary is two points and the weights are {1, 1/4}.
class ScaleSpaceBasis {
public:
    /// `count` = 0 uses one basis function per boundary node.
    explicit ScaleSpaceBasis(const Mesh& mesh, std::size_t count = 0);

    std::size_t size() const noexcept { return count_; }
    double perimeter() const noexcept { return perimeter_; }
    /// Arclength of each boundary node, in Mesh::boundary_nodes() order.
    const std::vector<double>& arclength() const noexcept { return arclength_; }

    /// Weight k^{-2} of the k-th (0-based) element.
    double weight(std::size_t k) const;
    /// Arclength frequency κ of the k-th element.
    double frequency(std::size_t k) const;
    /// L²(∂D)-normalized ψ_k at arclength s.
    double psi(std::size_t k, double s) const;

    int dim() const noexcept { return dim_; }

private:
    int dim_;
    std::size_t count_;
    double perimeter_ = 0.0;
    std::vector<double> arclength_;
};

BoundaryFunction trace(const FemFunction& u);

/// Functional representation d = R g of a trace.
BoundaryFunction to_functional(const BoundaryFunction& g, const FemMatrices& matrices);

/// d_i = (Kc + λMc - b)_i at boundary nodes: the weak conormal derivative
/// tested with the boundary hat functions.
BoundaryFunction weak_conormal_derivative(const FemFunction& u, const Vector& load, double lambda,
                                          const FemMatrices& matrices);
BoundaryFunction weak_conormal_derivative(const FemFunction& u, const Vector& load, double lambda);

/// (Σ_k k^{-2} γ_k²)^{1/2}; tail_bound bounds the omitted part of the square.
SeriesValue scale_space_norm(const BoundaryFunction& g, const ScaleSpaceBasis& basis, const FemMatrices& matrices);
/// Functional representations only.
SeriesValue scale_space_norm(const BoundaryFunction& g, const ScaleSpaceBasis& basis);

/// H_sc norm of the functional ∂_n u + β u (β = 0 gives the Neumann residual).
double robin_residual(const FemFunction& u, const Vector& load, double lambda, double beta,
                      const FemMatrices& matrices, const ScaleSpaceBasis& basis);
double robin_residual(const FemFunction& u, const Vector& load, double lambda, double beta);

/// Energy-orthonormal system e_k built from T_h f_k with f_k the
/// eigenfunctions, by two-pass Gram-Schmidt in a(u, v) = uᵀAv. Vectors with
/// relative norm below 1e-10 after orthogonalization are dropped; if the
/// eigenfunctions do not span V_h the system is completed with T_h of the
/// nodal loads.
class CameronMartinSystem {
public:
    CameronMartinSystem(const DiscreteSolutionOperator& op, const EigenBasis& basis);

    std::size_t size() const noexcept { return vectors_.size(); }
    /// Vectors coming from eigenfunctions (the rest complete the span).
    std::size_t spectral_count() const noexcept { return spectral_count_; }
    const Vector& vector(std::size_t k) const { return vectors_.at(k); }
    const DiscreteSolutionOperator& op() const noexcept { return op_; }

    /// ê_k(X_h) = e_kᵀ b for the load b that produced X_h.
    Vector coefficients(const Vector& load) const;

    /// Σ_{k<m} ê_k e_k as nodal coefficients.
    Vector partial_sum(const Vector& load, std::size_t m) const;

    /// ||X_h - Σ_{k<m} ê_k e_k||²_a for m = 0..size().
    std::vector<double> energy_residuals(const Vector& load) const;

private:
    const DiscreteSolutionOperator& op_;
    std::vector<Vector> vectors_;
    std::size_t spectral_count_ = 0;
};

/// Σ_{k<m} ê_k(X_h) trace(e_k).
BoundaryFunction measurable_trace_series(const CameronMartinSystem& system, const Vector& load, std::size_t m);

struct TraceSeriesSample {
    FemFunction path;
    Vector load;
    BoundaryFunction series;
};

/// Samples a path from the stream and returns its truncated trace series.
TraceSeriesSample measurable_trace_series(const CameronMartinSystem& system, GaussianStream& stream, std::size_t m);

/// "arclength,value" rows sorted by arclength, with a header line.
void write_boundary_csv(std::ostream& out, const BoundaryFunction& g, const ScaleSpaceBasis& basis);

}  // namespace whitefem
