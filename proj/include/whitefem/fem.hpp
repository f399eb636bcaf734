#pragma once

#include "whitefem/linear_solver.hpp"
#include "whitefem/mesh.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace whitefem {

using MeshPtr = std::shared_ptr<const Mesh>;

enum class BoundaryKind { Dirichlet, Neumann, Robin };

std::string to_string(BoundaryKind kind);

/// Homogeneous boundary condition of the model problem -Δu + λu = f.
/// Robin means ∂_n u + β u = 0 with β > 0.
class BoundaryCondition {
public:
    static BoundaryCondition dirichlet() { return BoundaryCondition(BoundaryKind::Dirichlet, 0.0); }
    static BoundaryCondition neumann() { return BoundaryCondition(BoundaryKind::Neumann, 0.0); }
    static BoundaryCondition robin(double beta);

    BoundaryKind kind() const noexcept { return kind_; }
    /// β for Robin, 0 otherwise.
    double beta() const noexcept { return beta_; }

    bool operator==(const BoundaryCondition&) const = default;

private:
    BoundaryCondition(BoundaryKind kind, double beta) : kind_(kind), beta_(beta) {}
    BoundaryKind kind_;
    double beta_;
};

/// Element of the P1 space V_h: nodal coefficients on a shared mesh.
class FemFunction {
public:
    FemFunction(MeshPtr mesh, Vector coefficients);

    static FemFunction zero(MeshPtr mesh);
    static FemFunction constant(MeshPtr mesh, double value);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    const Vector& coefficients() const noexcept { return coefficients_; }

private:
    MeshPtr mesh_;
    Vector coefficients_;
};

// Exact element matrices. Nodes in element order; the triangle must be
// counterclockwise.
Eigen::Matrix3d local_stiffness(const Point& a, const Point& b, const Point& c);
Eigen::Matrix3d local_mass(double area);

SparseMatrix assemble_stiffness(const Mesh& mesh);
SparseMatrix assemble_mass(const Mesh& mesh);
SparseMatrix assemble_boundary_mass(const Mesh& mesh);

/// K, M and R assembled together.
struct FemMatrices {
    SparseMatrix stiffness;
    SparseMatrix mass;
    SparseMatrix boundary_mass;

    static FemMatrices assemble(const Mesh& mesh);

    /// K + λM (+ βR for Robin), before any Dirichlet elimination.
    SparseMatrix system(const BoundaryCondition& bc, double lambda) const;
};

/// The discrete problem a(u_h, φ) = <f, φ> for all φ in V_h, factored once.
///
/// Loads are given in dual coordinates b_i = <f, φ_i>. Under Dirichlet
/// conditions boundary rows and columns are eliminated and the boundary
/// coefficients of every solution are exactly zero.
class GalerkinSystem {
public:
    GalerkinSystem(MeshPtr mesh, BoundaryCondition bc, double lambda, SolverOptions options = {});

    const Mesh& mesh() const noexcept { return *mesh_; }
    const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    const BoundaryCondition& bc() const noexcept { return bc_; }
    double lambda() const noexcept { return lambda_; }
    const FemMatrices& matrices() const noexcept { return matrices_; }

    /// Full (uneliminated) system matrix A = K + λM (+ βR).
    const SparseMatrix& system_matrix() const noexcept { return system_; }

    /// Nodes carrying unknowns (all nodes except Dirichlet boundary nodes).
    const std::vector<int>& free_nodes() const noexcept { return free_nodes_; }
    std::size_t num_unknowns() const noexcept { return free_nodes_.size(); }

    /// Coefficients of the Galerkin solution for a dual-coordinate load.
    Vector solve(const Vector& load) const;

    /// ||(A c - b)_free|| / ||b_free||.
    double relative_residual(const Vector& coefficients, const Vector& load) const;

    /// a(u, v) = uᵀ A v.
    double energy_inner(const Vector& u, const Vector& v) const;

    const SpdSolver& solver() const noexcept { return solver_; }

private:
    MeshPtr mesh_;
    BoundaryCondition bc_;
    double lambda_;
    FemMatrices matrices_;
    SparseMatrix system_;
    std::vector<int> free_nodes_;
    bool eliminated_ = false;
    SpdSolver solver_;
};

/// Ritz-Galerkin solution; checks the relative residual against 1e-10.
FemFunction solve_deterministic(MeshPtr mesh, const BoundaryCondition& bc, double lambda, const Vector& load);

/// Nonzero values of the nodal basis functions at a point (the vector p(z)).
/// Throws InvalidArgument when the point is outside the mesh.
std::vector<std::pair<int, double>> basis_values(const Mesh& mesh, const Point& point);

double evaluate(const FemFunction& u, const Point& point);

double l2_inner(const FemFunction& u, const FemFunction& v);
double l2_inner(const FemFunction& u, const FemFunction& v, const FemMatrices& matrices);
double h1_norm(const FemFunction& u);
double h1_norm(const FemFunction& u, const FemMatrices& matrices);

}  // namespace whitefem
