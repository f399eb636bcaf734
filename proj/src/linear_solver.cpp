#include "whitefem/linear_solver.hpp"

#include "whitefem/error.hpp"

#include <fmt/format.h>

#include <Eigen/IterativeLinearSolvers>

#include <ostream>

namespace whitefem {

SpdSolver::SpdSolver(SparseMatrix a, SolverOptions options) : a_(std::move(a)), options_(options) {
    if (a_.rows() != a_.cols()) throw InvalidArgument("SpdSolver: matrix is not square");
    a_.makeCompressed();
    if (static_cast<std::size_t>(a_.rows()) < options_.direct_limit) {
        llt_ = std::make_unique<Cholesky>(a_);
        if (llt_->info() != Eigen::Success)
            throw NumericalError("sparse Cholesky failed: matrix is not symmetric positive definite");
    }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Vector SpdSolver::solve(const Vector& b) const {
    if (b.size() != a_.rows())
        throw InvalidArgument(fmt::format("SpdSolver: right-hand side has length {}, expected {}", b.size(), a_.rows()));
    if (llt_) return llt_->solve(b);

    // A fresh solver object per call keeps concurrent solves free of shared state.
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(options_.cg_tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * a_.rows() + 100));
    cg.compute(a_);
    Vector x = cg.solve(b);
    if (cg.info() != Eigen::Success)
        throw NumericalError(fmt::format("conjugate gradient did not converge: relative residual {:.3e} after {} iterations",
                                         cg.error(), cg.iterations()));
    return x;
}

double SpdSolver::relative_residual(const Vector& x, const Vector& b) const {
    const double bn = b.norm();
    const double rn = (a_ * x - b).norm();
    return bn > 0.0 ? rn / bn : rn;
}

void write_coo(std::ostream& out, const SparseMatrix& m) {
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            out << fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
}

}  // namespace whitefem
