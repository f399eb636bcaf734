#include "whitefem/stochastic.hpp"

#include "whitefem/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace whitefem {

DiscreteSolutionOperator::DiscreteSolutionOperator(MeshPtr mesh, BoundaryCondition bc, double lambda,
                                                   SolverOptions options)
    : system_(std::move(mesh), bc, lambda, options), mass_factor_(system_.matrices().mass) {
    const Vector probe = system_.matrices().mass * Vector::Ones(static_cast<Eigen::Index>(system_.mesh().num_nodes()));
    const double res = system_.relative_residual(system_.solve(probe), probe);
    if (!(res <= 1e-10)) throw NumericalError(fmt::format("factorization probe residual {:.3e} exceeds 1e-10", res));
}

FemFunction path_from_normals(const DiscreteSolutionOperator& op, const Vector& z) {
    return FemFunction(op.mesh_ptr(), op.solve(op.mass_factor().apply(z)));
}

FemFunction sample_path(const DiscreteSolutionOperator& op, GaussianStream& stream) {
    Vector z(static_cast<Eigen::Index>(op.mesh().num_nodes()));
    stream.fill_normal(z.begin(), z.end());
    return path_from_normals(op, z);
}

namespace {

Vector point_vector(const Mesh& mesh, const Point& x) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (const auto& [i, w] : basis_values(mesh, x)) p[i] += w;
    return p;
}

}  // namespace

double exact_discrete_covariance(const DiscreteSolutionOperator& op, const Point& x, const Point& y) {
    const Vector wx = op.solve(point_vector(op.mesh(), x));
    const Vector wy = op.solve(point_vector(op.mesh(), y));
    return wx.dot(op.matrices().mass * wy);
}

double increment_variance(const DiscreteSolutionOperator& op, const Point& x, const Point& y) {
    const Vector w = op.solve(point_vector(op.mesh(), x) - point_vector(op.mesh(), y));
    return w.dot(op.matrices().mass * w);
}

FemFunction pointwise_variance_field(const DiscreteSolutionOperator& op, const ExecutionPolicy& policy) {
    const auto& free = op.system().free_nodes();
    const auto n = static_cast<Eigen::Index>(op.mesh().num_nodes());
    Vector var = Vector::Zero(n);
    parallel_for(policy, free.size(), [&](std::size_t k) {
        Vector e = Vector::Zero(n);
        e[free[k]] = 1.0;
        const Vector w = op.solve(e);
        var[free[k]] = op.mass_factor().apply_transpose(w).squaredNorm();
    });
    return FemFunction(op.mesh_ptr(), std::move(var));
}

double expected_l2_norm_sq(const DiscreteSolutionOperator& op, const ExecutionPolicy& policy) {
    // ||Lᵀ A^{-1} L||_F² with M = L Lᵀ.
    const SparseMatrix& lower = op.mass_factor().lower();
    const auto n = lower.cols();
    std::vector<double> columns(static_cast<std::size_t>(n));
    parallel_for(policy, columns.size(), [&](std::size_t j) {
        const Vector lj = lower.col(static_cast<Eigen::Index>(j));
        columns[j] = op.mass_factor().apply_transpose(op.solve(lj)).squaredNorm();
    });
    return pairwise_sum(columns);
}

MomentEstimate sample_moments(const DenseMatrix& samples, const ExecutionPolicy& policy) {
    const auto n = samples.rows();
    const auto p = samples.cols();
    if (n < 2) throw InvalidArgument("moment estimation needs at least 2 samples");
    MomentEstimate m;
    m.n = static_cast<std::size_t>(n);
    m.mean.resize(p);
    for (Eigen::Index j = 0; j < p; ++j)
        m.mean[j] = pairwise_sum(samples.col(j).data(), static_cast<std::size_t>(n), 1) / static_cast<double>(n);

    const DenseMatrix centered = samples.rowwise() - m.mean.transpose();
    m.covariance.resize(p, p);
    const std::size_t pairs = static_cast<std::size_t>(p * (p + 1) / 2);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> index;
    index.reserve(pairs);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j; k < p; ++k) index.emplace_back(j, k);
    parallel_for(policy, index.size(), [&](std::size_t q) {
        const auto [j, k] = index[q];
        const Vector prod = centered.col(j).cwiseProduct(centered.col(k));
        const double c = pairwise_sum(prod.data(), static_cast<std::size_t>(n), 1) / static_cast<double>(n - 1);
        m.covariance(j, k) = c;
        m.covariance(k, j) = c;
    });

    m.mean_se.resize(p);
    m.covariance_se.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        m.mean_se[j] = std::sqrt(m.covariance(j, j) / static_cast<double>(n));
        for (Eigen::Index k = 0; k < p; ++k) {
            const double cjk = m.covariance(j, k);
            m.covariance_se(j, k) =
                std::sqrt((m.covariance(j, j) * m.covariance(k, k) + cjk * cjk) / static_cast<double>(n - 1));
        }
    }
    return m;
}

DenseMatrix sample_point_values(const DiscreteSolutionOperator& op, const std::vector<Point>& points, std::size_t n,
                                std::uint64_t seed, std::uint64_t base_stream, const ExecutionPolicy& policy) {
    std::vector<std::vector<std::pair<int, double>>> probes;
    probes.reserve(points.size());
    for (const auto& x : points) probes.push_back(basis_values(op.mesh(), x));
    DenseMatrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(points.size()));
    parallel_for(policy, n, [&](std::size_t path) {
        GaussianStream stream(seed, base_stream + path);
        const FemFunction x = sample_path(op, stream);
        for (std::size_t j = 0; j < probes.size(); ++j) {
            double v = 0.0;
            for (const auto& [i, w] : probes[j]) v += w * x.coefficients()[i];
            values(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(j)) = v;
        }
    });
    return values;
}

MomentEstimate monte_carlo_moments(const DiscreteSolutionOperator& op, const std::vector<Point>& points,
                                   std::size_t n, std::uint64_t seed, std::uint64_t base_stream,
                                   const ExecutionPolicy& policy) {
    if (n < 2) throw InvalidArgument("monte_carlo_moments needs n >= 2");
    if (points.empty()) throw InvalidArgument("monte_carlo_moments needs at least one point");
    MomentEstimate m = sample_moments(sample_point_values(op, points, n, seed, base_stream, policy), policy);
    m.seed = seed;
    m.base_stream = base_stream;
    return m;
}

}  // namespace whitefem
