#include "whitefem/fem.hpp"

#include "whitefem/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace whitefem {

std::string to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::Dirichlet: return "dirichlet";
        case BoundaryKind::Neumann: return "neumann";
        case BoundaryKind::Robin: return "robin";
    }
    return "unknown";
}

BoundaryCondition BoundaryCondition::robin(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("Robin condition requires beta > 0");
    return BoundaryCondition(BoundaryKind::Robin, beta);
}

FemFunction::FemFunction(MeshPtr mesh, Vector coefficients)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients)) {
    if (!mesh_) throw InvalidArgument("FemFunction requires a mesh");
    if (static_cast<std::size_t>(coefficients_.size()) != mesh_->num_nodes())
        throw InvalidArgument(fmt::format("FemFunction has {} coefficients for {} nodes", coefficients_.size(),
                                          mesh_->num_nodes()));
}

FemFunction FemFunction::zero(MeshPtr mesh) {
    const auto n = static_cast<Eigen::Index>(mesh->num_nodes());
    return FemFunction(std::move(mesh), Vector::Zero(n));
}

FemFunction FemFunction::constant(MeshPtr mesh, double value) {
    const auto n = static_cast<Eigen::Index>(mesh->num_nodes());
    return FemFunction(std::move(mesh), Vector::Constant(n, value));
}

Eigen::Matrix3d local_stiffness(const Point& a, const Point& b, const Point& c) {
    const std::array<const Point*, 3> p{&a, &b, &c};
    const double area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    Eigen::Matrix<double, 3, 2> grad;
    for (int i = 0; i < 3; ++i) {
        const Point& pj = *p[(i + 1) % 3];
        const Point& pk = *p[(i + 2) % 3];
        grad(i, 0) = (pj[1] - pk[1]) / (2.0 * area);
        grad(i, 1) = (pk[0] - pj[0]) / (2.0 * area);
    }
    return area * grad * grad.transpose();
}

Eigen::Matrix3d local_mass(double area) {
    Eigen::Matrix3d m;
    m << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0;
    return (area / 12.0) * m;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void check_element(const Mesh& mesh, std::size_t e) {
    const double measure = mesh.element_measure(e);
    const double diam = mesh.element_diameter(e);
    const double scale = mesh.dim() == 1 ? diam : diam * diam;
    if (!(measure > 1e-14 * scale)) throw NumericalError(fmt::format("degenerate element {}", e));
}

SparseMatrix from_triplets(std::size_t n, const Triplets& t) {
    SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh) {
    Triplets t;
    const auto& nodes = mesh.nodes();
    if (mesh.dim() == 1) {
        t.reserve(4 * mesh.num_elements());
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            check_element(mesh, e);
            const auto& el = mesh.elements()[e];
            const double k = 1.0 / mesh.element_measure(e);
            t.emplace_back(el[0], el[0], k);
            t.emplace_back(el[1], el[1], k);
            t.emplace_back(el[0], el[1], -k);
            t.emplace_back(el[1], el[0], -k);
        }
    } else {
        t.reserve(9 * mesh.num_elements());
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            check_element(mesh, e);
            const auto& el = mesh.elements()[e];
            const Eigen::Matrix3d k = local_stiffness(nodes[el[0]], nodes[el[1]], nodes[el[2]]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) t.emplace_back(el[i], el[j], k(i, j));
        }
    }
    return from_triplets(mesh.num_nodes(), t);
}

SparseMatrix assemble_mass(const Mesh& mesh) {
    Triplets t;
    if (mesh.dim() == 1) {
        t.reserve(4 * mesh.num_elements());
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            check_element(mesh, e);
            const auto& el = mesh.elements()[e];
            const double len = mesh.element_measure(e);
            t.emplace_back(el[0], el[0], len / 3.0);
            t.emplace_back(el[1], el[1], len / 3.0);
            t.emplace_back(el[0], el[1], len / 6.0);
            t.emplace_back(el[1], el[0], len / 6.0);
        }
    } else {
        t.reserve(9 * mesh.num_elements());
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            check_element(mesh, e);
            const auto& el = mesh.elements()[e];
            const Eigen::Matrix3d m = local_mass(mesh.element_measure(e));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) t.emplace_back(el[i], el[j], m(i, j));
        }
    }
    return from_triplets(mesh.num_nodes(), t);
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh) {
    Triplets t;
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        const auto& fc = mesh.facets()[f];
        if (mesh.dim() == 1) {
            t.emplace_back(fc.nodes[0], fc.nodes[0], 1.0);
        } else {
            const double len = mesh.facet_measure(f);
            const int a = fc.nodes[0], b = fc.nodes[1];
            t.emplace_back(a, a, len / 3.0);
            t.emplace_back(b, b, len / 3.0);
            t.emplace_back(a, b, len / 6.0);
            t.emplace_back(b, a, len / 6.0);
        }
    }
    return from_triplets(mesh.num_nodes(), t);
}

FemMatrices FemMatrices::assemble(const Mesh& mesh) {
    return FemMatrices{assemble_stiffness(mesh), assemble_mass(mesh), assemble_boundary_mass(mesh)};
}

SparseMatrix FemMatrices::system(const BoundaryCondition& bc, double lambda) const {
    SparseMatrix a = stiffness + lambda * mass;
    if (bc.kind() == BoundaryKind::Robin) a += bc.beta() * boundary_mass;
    a.makeCompressed();
    return a;
}

namespace {

SparseMatrix restrict_to(const SparseMatrix& a, const std::vector<int>& keep, std::size_t n) {
    std::vector<int> index(n, -1);
    for (std::size_t k = 0; k < keep.size(); ++k) index[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
    Triplets t;
    t.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
        const int jc = index[static_cast<std::size_t>(col)];
        if (jc < 0) continue;
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const int ir = index[static_cast<std::size_t>(it.row())];
            if (ir >= 0) t.emplace_back(ir, jc, it.value());
        }
    }
    return from_triplets(keep.size(), t);
}

std::vector<int> free_nodes_of(const Mesh& mesh, const BoundaryCondition& bc) {
    std::vector<int> free;
    free.reserve(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
        if (bc.kind() != BoundaryKind::Dirichlet || !mesh.is_boundary_node(i)) free.push_back(static_cast<int>(i));
    return free;
}

}  // namespace

GalerkinSystem::GalerkinSystem(MeshPtr mesh, BoundaryCondition bc, double lambda, SolverOptions options)
    : mesh_(std::move(mesh)),
      bc_(bc),
      lambda_(lambda > 0.0 ? lambda : throw InvalidArgument("lambda must be positive")),
      matrices_(FemMatrices::assemble(*mesh_)),
      system_(matrices_.system(bc_, lambda_)),
      free_nodes_(free_nodes_of(*mesh_, bc_)),
      eliminated_(free_nodes_.size() != mesh_->num_nodes()),
      solver_(eliminated_ ? restrict_to(system_, free_nodes_, mesh_->num_nodes()) : system_, options) {
    if (free_nodes_.empty()) throw InvalidArgument("Dirichlet problem has no interior unknowns");
}

Vector GalerkinSystem::solve(const Vector& load) const {
    const auto n = static_cast<Eigen::Index>(mesh_->num_nodes());
    if (load.size() != n)
        throw InvalidArgument(fmt::format("load vector has length {}, mesh has {} nodes", load.size(), n));
    if (!eliminated_) return solver_.solve(load);
    Vector reduced(static_cast<Eigen::Index>(free_nodes_.size()));
    for (std::size_t k = 0; k < free_nodes_.size(); ++k) reduced[static_cast<Eigen::Index>(k)] = load[free_nodes_[k]];
    const Vector x = solver_.solve(reduced);
    Vector full = Vector::Zero(n);
    for (std::size_t k = 0; k < free_nodes_.size(); ++k) full[free_nodes_[k]] = x[static_cast<Eigen::Index>(k)];
    return full;
}

double GalerkinSystem::relative_residual(const Vector& coefficients, const Vector& load) const {
    const Vector r = system_ * coefficients - load;
    double rn = 0.0, bn = 0.0;
    for (int i : free_nodes_) {
        rn += r[i] * r[i];
        bn += load[i] * load[i];
    }
    return bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
}

double GalerkinSystem::energy_inner(const Vector& u, const Vector& v) const { return u.dot(system_ * v); }

FemFunction solve_deterministic(MeshPtr mesh, const BoundaryCondition& bc, double lambda, const Vector& load) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    GalerkinSystem system(mesh, bc, lambda);
    Vector c = system.solve(load);
    const double res = system.relative_residual(c, load);
    if (!(res <= 1e-10)) throw NumericalError(fmt::format("Galerkin solve residual {:.3e} exceeds 1e-10", res));
    return FemFunction(std::move(mesh), std::move(c));
}

std::vector<std::pair<int, double>> basis_values(const Mesh& mesh, const Point& point) {
    const auto loc = mesh.locate(point);
    if (!loc) throw InvalidArgument(fmt::format("point ({}, {}) is outside the domain", point[0], point[1]));
    const auto& el = mesh.elements()[loc->element];
    std::vector<std::pair<int, double>> out;
    for (int k = 0; k <= mesh.dim(); ++k) out.emplace_back(el[k], loc->weights[k]);
    return out;
}

double evaluate(const FemFunction& u, const Point& point) {
    double v = 0.0;
    for (const auto& [i, w] : basis_values(u.mesh(), point)) v += w * u.coefficients()[i];
    return v;
}

namespace {
void require_same_mesh(const FemFunction& u, const FemFunction& v) {
    if (u.mesh_ptr() != v.mesh_ptr()) throw InvalidArgument("functions live on different meshes");
}
}  // namespace

double l2_inner(const FemFunction& u, const FemFunction& v, const FemMatrices& matrices) {
    require_same_mesh(u, v);
    return u.coefficients().dot(matrices.mass * v.coefficients());
}

double l2_inner(const FemFunction& u, const FemFunction& v) {
    require_same_mesh(u, v);
    return u.coefficients().dot(assemble_mass(u.mesh()) * v.coefficients());
}

double h1_norm(const FemFunction& u, const FemMatrices& matrices) {
    const Vector& c = u.coefficients();
    const double sq = c.dot(matrices.stiffness * c) + c.dot(matrices.mass * c);
    return std::sqrt(std::max(sq, 0.0));
}

double h1_norm(const FemFunction& u) { return h1_norm(u, FemMatrices::assemble(u.mesh())); }

}  // namespace whitefem
