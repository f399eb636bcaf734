#include "whitefem/boundary.hpp"

#include "whitefem/error.hpp"
#include "whitefem/mode_projection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace whitefem {

BoundaryFunction::BoundaryFunction(MeshPtr mesh, Vector values, BoundaryRepresentation representation)
    : mesh_(std::move(mesh)), values_(std::move(values)), representation_(representation) {
    if (!mesh_) throw InvalidArgument("BoundaryFunction requires a mesh");
    if (static_cast<std::size_t>(values_.size()) != mesh_->boundary_nodes().size())
        throw InvalidArgument(fmt::format("BoundaryFunction has {} values for {} boundary nodes", values_.size(),
                                          mesh_->boundary_nodes().size()));
}

void BoundaryFunction::require_compatible(const BoundaryFunction& other) const {
    if (mesh_ != other.mesh_) throw InvalidArgument("boundary functions live on different meshes");
    if (representation_ != other.representation_)
        throw InvalidArgument("cannot combine trace and functional representations");
}

BoundaryFunction BoundaryFunction::operator+(const BoundaryFunction& other) const {
    require_compatible(other);
    return BoundaryFunction(mesh_, values_ + other.values_, representation_);
}

BoundaryFunction BoundaryFunction::operator-(const BoundaryFunction& other) const {
    require_compatible(other);
    return BoundaryFunction(mesh_, values_ - other.values_, representation_);
}

BoundaryFunction BoundaryFunction::operator*(double alpha) const {
    return BoundaryFunction(mesh_, alpha * values_, representation_);
}

ScaleSpaceBasis::ScaleSpaceBasis(const Mesh& mesh, std::size_t count) : dim_(mesh.dim()) {
    const auto& bnodes = mesh.boundary_nodes();
    arclength_.assign(bnodes.size(), 0.0);
    if (dim_ == 1) {
        if (bnodes.size() != 2) throw InvalidArgument("interval mesh must have two boundary points");
        count_ = 2;
        const bool first_left = mesh.nodes()[bnodes[0]][0] < mesh.nodes()[bnodes[1]][0];
        arclength_[0] = first_left ? 0.0 : 1.0;
        arclength_[1] = first_left ? 1.0 : 0.0;
        perimeter_ = 2.0;
        return;
    }
    count_ = count == 0 ? bnodes.size() : count;

    std::unordered_map<int, std::size_t> position;
    for (std::size_t i = 0; i < bnodes.size(); ++i) position.emplace(bnodes[i], i);
    std::vector<int> next(bnodes.size(), -1);
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        const auto [a, b] = oriented_facet(mesh, f);
        auto& slot = next[position.at(a)];
        if (slot != -1) throw InvalidArgument("boundary is not a simple closed curve");
        slot = b;
    }
    const auto start = *std::min_element(bnodes.begin(), bnodes.end(), [&](int a, int b) {
        return mesh.nodes()[a] < mesh.nodes()[b];
    });
    int node = start;
    std::size_t visited = 0;
    double s = 0.0;
    do {
        const std::size_t pos = position.at(node);
        arclength_[pos] = s;
        const int nb = next[pos];
        if (nb < 0) throw InvalidArgument("boundary is not a closed curve");
        const auto& p = mesh.nodes()[node];
        const auto& q = mesh.nodes()[nb];
        s += std::hypot(q[0] - p[0], q[1] - p[1]);
        node = nb;
        ++visited;
    } while (node != start && visited <= bnodes.size());
    if (visited != bnodes.size()) throw InvalidArgument("boundary must be a single closed curve");
    perimeter_ = s;
}

double ScaleSpaceBasis::weight(std::size_t k) const {
    const double kk = static_cast<double>(k + 1);
    return 1.0 / (kk * kk);
}

double ScaleSpaceBasis::frequency(std::size_t k) const {
    if (dim_ == 1) return 0.0;
    return 2.0 * std::numbers::pi * static_cast<double>((k + 1) / 2) / perimeter_;
}

double ScaleSpaceBasis::psi(std::size_t k, double s) const {
    if (dim_ == 1) return s == static_cast<double>(k) ? 1.0 : 0.0;
    if (k == 0) return 1.0 / std::sqrt(perimeter_);
    const double amp = std::sqrt(2.0 / perimeter_);
    const double t = frequency(k) * s;
    return k % 2 == 1 ? amp * std::cos(t) : amp * std::sin(t);
}

BoundaryFunction trace(const FemFunction& u) {
    const auto& bnodes = u.mesh().boundary_nodes();
    Vector v(static_cast<Eigen::Index>(bnodes.size()));
    for (std::size_t i = 0; i < bnodes.size(); ++i) v[static_cast<Eigen::Index>(i)] = u.coefficients()[bnodes[i]];
    return BoundaryFunction(u.mesh_ptr(), std::move(v), BoundaryRepresentation::Trace);
}

namespace {

Vector restrict_to_boundary(const Mesh& mesh, const Vector& full) {
    const auto& bnodes = mesh.boundary_nodes();
    Vector v(static_cast<Eigen::Index>(bnodes.size()));
    for (std::size_t i = 0; i < bnodes.size(); ++i) v[static_cast<Eigen::Index>(i)] = full[bnodes[i]];
    return v;
}

void require_matrices(const Mesh& mesh, const FemMatrices& matrices) {
    if (static_cast<std::size_t>(matrices.mass.rows()) != mesh.num_nodes())
        throw InvalidArgument("matrices do not belong to this mesh");
}

}  // namespace

BoundaryFunction to_functional(const BoundaryFunction& g, const FemMatrices& matrices) {
    if (g.representation() == BoundaryRepresentation::Functional) return g;
    const Mesh& mesh = g.mesh();
    require_matrices(mesh, matrices);
    Vector full = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    const auto& bnodes = mesh.boundary_nodes();
    for (std::size_t i = 0; i < bnodes.size(); ++i) full[bnodes[i]] = g.values()[static_cast<Eigen::Index>(i)];
    return BoundaryFunction(g.mesh_ptr(), restrict_to_boundary(mesh, matrices.boundary_mass * full),
                            BoundaryRepresentation::Functional);
}

BoundaryFunction weak_conormal_derivative(const FemFunction& u, const Vector& load, double lambda,
                                          const FemMatrices& matrices) {
    const Mesh& mesh = u.mesh();
    require_matrices(mesh, matrices);
    if (static_cast<std::size_t>(load.size()) != mesh.num_nodes()) throw InvalidArgument("load does not match the mesh");
    const Vector& c = u.coefficients();
    const Vector d = matrices.stiffness * c + lambda * (matrices.mass * c) - load;
    return BoundaryFunction(u.mesh_ptr(), restrict_to_boundary(mesh, d), BoundaryRepresentation::Functional);
}

BoundaryFunction weak_conormal_derivative(const FemFunction& u, const Vector& load, double lambda) {
    return weak_conormal_derivative(u, load, lambda, FemMatrices::assemble(u.mesh()));
}

SeriesValue scale_space_norm(const BoundaryFunction& g, const ScaleSpaceBasis& basis) {
    if (g.representation() != BoundaryRepresentation::Functional)
        throw InvalidArgument("trace representation needs the boundary mass matrix to be normed");
    const Vector& d = g.values();
    if (static_cast<std::size_t>(d.size()) != basis.arclength().size())
        throw InvalidArgument("scale-space basis belongs to a different mesh");
    const auto& s = basis.arclength();
    std::vector<double> terms(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        double gamma = 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) gamma += basis.psi(k, s[static_cast<std::size_t>(i)]) * d[i];
        gamma *= std::pow(1.0 + basis.frequency(k) * basis.frequency(k), -0.25);
        terms[k] = basis.weight(k) * gamma * gamma;
    }
    SeriesValue out{std::sqrt(pairwise_sum(terms)), 0.0};
    if (basis.dim() == 2) {
        const double bound = d.cwiseAbs().sum() * std::sqrt(2.0 / basis.perimeter());
        out.tail_bound = bound * bound / static_cast<double>(basis.size());
    }
    return out;
}

SeriesValue scale_space_norm(const BoundaryFunction& g, const ScaleSpaceBasis& basis, const FemMatrices& matrices) {
    return scale_space_norm(to_functional(g, matrices), basis);
}

double robin_residual(const FemFunction& u, const Vector& load, double lambda, double beta,
                      const FemMatrices& matrices, const ScaleSpaceBasis& basis) {
    if (!(beta >= 0.0)) throw InvalidArgument("robin_residual needs beta >= 0");
    const BoundaryFunction d = weak_conormal_derivative(u, load, lambda, matrices);
    const Vector rc = matrices.boundary_mass * u.coefficients();
    const BoundaryFunction total(u.mesh_ptr(), d.values() + beta * restrict_to_boundary(u.mesh(), rc),
                                 BoundaryRepresentation::Functional);
    return scale_space_norm(total, basis).value;
}

double robin_residual(const FemFunction& u, const Vector& load, double lambda, double beta) {
    return robin_residual(u, load, lambda, beta, FemMatrices::assemble(u.mesh()), ScaleSpaceBasis(u.mesh()));
}

CameronMartinSystem::CameronMartinSystem(const DiscreteSolutionOperator& op, const EigenBasis& basis) : op_(op) {
    const SparseMatrix& a = op.system().system_matrix();
    const std::size_t dim = op.system().num_unknowns();
    const auto n = static_cast<Eigen::Index>(op.mesh().num_nodes());

    auto try_add = [&](Vector v) {
        const double initial = std::sqrt(std::max(0.0, v.dot(a * v)));
        if (!(initial > 0.0)) return;
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<double> proj(vectors_.size());
            const Vector av = a * v;
            for (std::size_t j = 0; j < vectors_.size(); ++j) proj[j] = vectors_[j].dot(av);
            for (std::size_t j = 0; j < vectors_.size(); ++j) v -= proj[j] * vectors_[j];
        }
        const double norm = std::sqrt(std::max(0.0, v.dot(a * v)));
        if (norm < 1e-10 * initial) return;
        vectors_.push_back(v / norm);
    };

    const ModeProjector projector(basis, op.mesh());
    for (std::size_t k = 0; k < basis.size() && vectors_.size() < dim; ++k) try_add(op.solve(projector.load(k)));
    spectral_count_ = vectors_.size();
    for (int node : op.system().free_nodes()) {
        if (vectors_.size() >= dim) break;
        Vector e = Vector::Zero(n);
        e[node] = 1.0;
        try_add(op.solve(e));
    }
    if (vectors_.size() < dim)
        throw NumericalError(fmt::format("Cameron-Martin system has rank {} < {}", vectors_.size(), dim));
}

Vector CameronMartinSystem::coefficients(const Vector& load) const {
    Vector c(static_cast<Eigen::Index>(vectors_.size()));
    for (std::size_t k = 0; k < vectors_.size(); ++k) c[static_cast<Eigen::Index>(k)] = vectors_[k].dot(load);
    return c;
}

Vector CameronMartinSystem::partial_sum(const Vector& load, std::size_t m) const {
    if (m > vectors_.size())
        throw InvalidArgument(fmt::format("truncation {} exceeds the dimension {}", m, vectors_.size()));
    Vector s = Vector::Zero(static_cast<Eigen::Index>(op_.mesh().num_nodes()));
    for (std::size_t k = 0; k < m; ++k) s += vectors_[k].dot(load) * vectors_[k];
    return s;
}

std::vector<double> CameronMartinSystem::energy_residuals(const Vector& load) const {
    const Vector x = op_.solve(load);
    double rest = x.dot(load);
    std::vector<double> out{rest};
    for (const auto& v : vectors_) {
        const double c = v.dot(load);
        rest -= c * c;
        out.push_back(std::max(rest, 0.0));
    }
    return out;
}

BoundaryFunction measurable_trace_series(const CameronMartinSystem& system, const Vector& load, std::size_t m) {
    return trace(FemFunction(system.op().mesh_ptr(), system.partial_sum(load, m)));
}

TraceSeriesSample measurable_trace_series(const CameronMartinSystem& system, GaussianStream& stream, std::size_t m) {
    const auto& op = system.op();
    Vector z(static_cast<Eigen::Index>(op.mesh().num_nodes()));
    stream.fill_normal(z.begin(), z.end());
    Vector load = op.mass_factor().apply(z);
    FemFunction path(op.mesh_ptr(), op.solve(load));
    BoundaryFunction series = measurable_trace_series(system, load, m);
    return {std::move(path), std::move(load), std::move(series)};
}

void write_boundary_csv(std::ostream& out, const BoundaryFunction& g, const ScaleSpaceBasis& basis) {
    const auto& s = basis.arclength();
    if (s.size() != static_cast<std::size_t>(g.values().size()))
        throw InvalidArgument("scale-space basis belongs to a different mesh");
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
    out << (g.representation() == BoundaryRepresentation::Trace ? "arclength,value\n" : "arclength,coefficient\n");
    for (std::size_t i : order)
        out << fmt::format("{:.17g},{:.17g}\n", s[i], g.values()[static_cast<Eigen::Index>(i)]);
}

}  // namespace whitefem
