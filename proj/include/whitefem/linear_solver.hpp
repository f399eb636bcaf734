#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <iosfwd>
#include <memory>

namespace whitefem {

/// Symmetric sparse matrices are stored column-compressed; for a symmetric
/// matrix this is the same array layout as compressed rows.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct SolverOptions {
    /// Systems with fewer unknowns are factored by sparse Cholesky.
    std::size_t direct_limit = 200000;
    /// Relative residual target for the iterative path.
    double cg_tolerance = 1e-10;
};

/// Solver for a fixed symmetric positive definite matrix.
///
/// The factorization is computed once; solve() is const and safe to call
/// concurrently from several threads.
class SpdSolver {
public:
    explicit SpdSolver(SparseMatrix a, SolverOptions options = {});
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    Vector solve(const Vector& b) const;

    bool is_direct() const noexcept { return static_cast<bool>(llt_); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(a_.rows()); }
    const SparseMatrix& matrix() const noexcept { return a_; }

    /// ||A x - b|| / ||b|| (0 when b = 0 and x = 0).
    double relative_residual(const Vector& x, const Vector& b) const;

private:
    using Cholesky = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

    SparseMatrix a_;
    SolverOptions options_;
    std::unique_ptr<Cholesky> llt_;
};

/// Coordinate text export, one "row col value" triple per line.
void write_coo(std::ostream& out, const SparseMatrix& m);

}  // namespace whitefem
