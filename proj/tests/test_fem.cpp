#include "whitefem/error.hpp"
#include "whitefem/fem.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace whitefem;

namespace {

MeshPtr interval(int n, double a = 0.0, double b = 1.0) {
    return std::make_shared<const Mesh>(build_interval_mesh(a, b, n));
}
MeshPtr rectangle(int n, double lx = std::numbers::pi, double ly = std::numbers::pi) {
    return std::make_shared<const Mesh>(build_rectangle_mesh(lx, ly, n, n));
}

double sparse_sum(const SparseMatrix& m) { return DenseMatrix(m).sum(); }

}  // namespace

TEST_CASE("local element matrices") {
    const Eigen::Matrix3d k = local_stiffness({0, 0}, {1, 0}, {0, 1});
    Eigen::Matrix3d expected;
    expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    CHECK((k - expected).cwiseAbs().maxCoeff() < 1e-15);

    // Independent check: ∫∇φ_i·∇φ_j for an arbitrary triangle from the
    // gradient formula ∇φ_i = (y_j - y_k, x_k - x_j) / (2A).
    const Point a{0.3, -0.1}, b{1.7, 0.4}, c{0.6, 1.9};
    const double area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    const std::array<Point, 3> p{a, b, c};
    Eigen::Matrix3d ref;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto& pi1 = p[(i + 1) % 3];
            const auto& pi2 = p[(i + 2) % 3];
            const auto& pj1 = p[(j + 1) % 3];
            const auto& pj2 = p[(j + 2) % 3];
            const double gx_i = (pi1[1] - pi2[1]) / (2 * area), gy_i = (pi2[0] - pi1[0]) / (2 * area);
            const double gx_j = (pj1[1] - pj2[1]) / (2 * area), gy_j = (pj2[0] - pj1[0]) / (2 * area);
            ref(i, j) = area * (gx_i * gx_j + gy_i * gy_j);
        }
    CHECK((local_stiffness(a, b, c) - ref).cwiseAbs().maxCoeff() < 1e-14);

    Eigen::Matrix3d m = local_mass(0.6);
    Eigen::Matrix3d mref;
    mref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    CHECK((m - 0.05 * mref).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("1D assembly rows") {
    const auto mesh = interval(8);
    const double h = 1.0 / 8;
    const DenseMatrix k(assemble_stiffness(*mesh));
    const DenseMatrix m(assemble_mass(*mesh));
    CHECK(k(3, 2) == doctest::Approx(-1 / h));
    CHECK(k(3, 3) == doctest::Approx(2 / h));
    CHECK(k(3, 4) == doctest::Approx(-1 / h));
    CHECK(m(3, 2) == doctest::Approx(h / 6));
    CHECK(m(3, 3) == doctest::Approx(2 * h / 3));
    CHECK(m(3, 4) == doctest::Approx(h / 6));
    const DenseMatrix r(assemble_boundary_mass(*mesh));
    CHECK(r(0, 0) == 1.0);
    CHECK(r(8, 8) == 1.0);
    CHECK(r.sum() == 2.0);
}

TEST_CASE("2D assembly identities") {
    const double pi = std::numbers::pi;
    for (int n : {1, 3, 8}) {
        const auto mesh = rectangle(n);
        const SparseMatrix k = assemble_stiffness(*mesh);
        const Vector ones = Vector::Ones(static_cast<Eigen::Index>(mesh->num_nodes()));
        CHECK((k * ones).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(sparse_sum(assemble_mass(*mesh)) - pi * pi) < 1e-12 * pi * pi);
        CHECK(std::abs(sparse_sum(assemble_boundary_mass(*mesh)) - 4 * pi) < 1e-12 * 4 * pi);
        CHECK(DenseMatrix(k).isApprox(DenseMatrix(k).transpose(), 0.0));
    }
    const auto one = std::make_shared<const Mesh>(build_rectangle_mesh(2.0, 1.0, 1, 1));
    const DenseMatrix r(assemble_boundary_mass(*one));
    // bottom edge (0,0)-(2,0): length 2
    CHECK(r(0, 0) == doctest::Approx(2 * 2.0 / 6 + 2 * 1.0 / 6));
    CHECK(r(0, 1) == doctest::Approx(2.0 / 6));
}

TEST_CASE("degenerate elements are reported") {
    std::vector<Point> nodes{{0, 0}, {1, 0}, {0, 1}, {1, 1e-17}};
    // a sliver: nodes 0, 1, 3 are numerically collinear
    std::vector<BoundaryFacet> facets{{{0, 1}, 0}, {{1, 3}, 0}, {{3, 0}, 0}};
    bool threw = false;
    try {
        const Mesh m(2, nodes, {{0, 1, 3}}, facets);
        (void)assemble_stiffness(m);
    } catch (const Error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("element") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("deterministic solves") {
    const auto mesh = rectangle(6);
    const FemMatrices mats = FemMatrices::assemble(*mesh);
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(mesh->num_nodes()));
    for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(), BoundaryCondition::robin(2.0)})
        CHECK(solve_deterministic(mesh, bc, 1.5, zero).coefficients().cwiseAbs().maxCoeff() == 0.0);

    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(mesh->num_nodes()));
    const FemFunction u = solve_deterministic(mesh, BoundaryCondition::neumann(), 2.5, mats.mass * ones);
    CHECK((u.coefficients().array() - 0.4).abs().maxCoeff() < 1e-12);

    const FemFunction d = solve_deterministic(mesh, BoundaryCondition::dirichlet(), 1.0, mats.mass * ones);
    for (int i : mesh->boundary_nodes()) CHECK(d.coefficients()[i] == 0.0);

    CHECK_THROWS_AS(GalerkinSystem(mesh, BoundaryCondition::neumann(), 0.0), InvalidArgument);
    CHECK_THROWS_AS(BoundaryCondition::robin(-1.0), InvalidArgument);
}

TEST_CASE("1D Dirichlet sine load converges at rate 2") {
    const double pi = std::numbers::pi;
    std::vector<double> errs;
    for (int n : {16, 32, 64, 128}) {
        const auto mesh = interval(n);
        const double h = 1.0 / n;
        // exact loads (sin(πx), φ_i) for interior hats
        Vector b = Vector::Zero(n + 1);
        for (int i = 1; i < n; ++i) {
            const double x = i * h;
            b[i] = 2.0 * std::sin(pi * x) * (1.0 - std::cos(pi * h)) / (pi * pi * h);
        }
        const FemFunction u = solve_deterministic(mesh, BoundaryCondition::dirichlet(), 1.0, b);
        double err = 0.0;
        for (int i = 0; i <= n; ++i)
            err = std::max(err, std::abs(u.coefficients()[i] - std::sin(pi * i * h) / (pi * pi + 1.0)));
        errs.push_back(err);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double rate = std::log2(errs[i - 1] / errs[i]);
        CHECK(rate > 1.9);
        CHECK(rate < 2.1);
    }
}

TEST_CASE("evaluation and norms") {
    const auto mesh = rectangle(4, 2.0, 1.0);
    Vector c(static_cast<Eigen::Index>(mesh->num_nodes()));
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = std::sin(1.0 + static_cast<double>(i));
    const FemFunction u(mesh, c);
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i)
        CHECK(evaluate(u, mesh->node(i)) == doctest::Approx(c[static_cast<Eigen::Index>(i)]).epsilon(1e-14));
    const FemFunction k = FemFunction::constant(mesh, 3.25);
    CHECK(evaluate(k, {0.123, 0.77}) == doctest::Approx(3.25).epsilon(1e-14));
    CHECK(l2_inner(FemFunction::constant(mesh, 1.0), FemFunction::constant(mesh, 1.0)) == doctest::Approx(2.0));
    CHECK(h1_norm(FemFunction::zero(mesh)) == 0.0);
    CHECK_THROWS_AS(evaluate(u, {3.0, 0.5}), InvalidArgument);

    const auto line = interval(4);
    Vector v = Vector::Zero(5);
    v[1] = 1.0;
    v[2] = 3.0;
    const FemFunction w(line, v);
    CHECK(evaluate(w, {0.375, 0.0}) == doctest::Approx(2.0));
    Vector e = Vector::Zero(5);
    e[2] = 1.0;
    const FemFunction hat(line, e);
    CHECK(l2_inner(hat, hat) == doctest::Approx(2.0 * 0.25 / 3.0));

    const auto other = rectangle(4, 2.0, 1.0);
    CHECK_THROWS_AS(l2_inner(u, FemFunction::zero(other)), InvalidArgument);
}

TEST_CASE("Robin system includes the boundary mass") {
    const auto mesh = rectangle(3);
    const FemMatrices mats = FemMatrices::assemble(*mesh);
    const SparseMatrix a = mats.system(BoundaryCondition::robin(0.7), 1.3);
    const SparseMatrix ref = mats.stiffness + 1.3 * mats.mass + 0.7 * mats.boundary_mass;
    CHECK((DenseMatrix(a) - DenseMatrix(ref)).cwiseAbs().maxCoeff() < 1e-15);
    const GalerkinSystem sys(mesh, BoundaryCondition::robin(0.7), 1.3);
    const Vector b = mats.mass * Vector::Ones(static_cast<Eigen::Index>(mesh->num_nodes()));
    const Vector c = sys.solve(b);
    CHECK(sys.relative_residual(c, b) < 1e-12);
    CHECK(sys.energy_inner(c, c) == doctest::Approx(c.dot(b)).epsilon(1e-12));
}
