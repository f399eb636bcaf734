#include "whitefem/error.hpp"
#include "whitefem/mode_projection.hpp"
#include "whitefem/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace whitefem;

namespace {
constexpr double pi = std::numbers::pi;

// (4/π²) Σ_{m,n odd} 1/(m²+n²+1)², evaluated in tools/oracles/constants.py
// with 40-digit arithmetic (closed-form inner sums, accelerated outer sum).
constexpr double dirichlet_center_variance = 0.056500125236872670315;
// Same for Neumann: Σ over even m, n with weights (1/π or 2/π per axis).
constexpr double neumann_center_variance = 0.12857009949035745059;
}  // namespace

TEST_CASE("interval and rectangle eigenvalues") {
    const EigenBasis d = eigenpairs(ModelDomain::interval(0.0, pi), BoundaryCondition::dirichlet(), 3);
    CHECK(d.mu(0) == doctest::Approx(1.0));
    CHECK(d.mu(1) == doctest::Approx(4.0));
    CHECK(d.mu(2) == doctest::Approx(9.0));

    const EigenBasis r = eigenpairs(ModelDomain::rectangle(pi, pi), BoundaryCondition::dirichlet(), 6);
    CHECK(r.mu(0) == doctest::Approx(2.0));
    const Point p{0.7, 1.9};
    CHECK(std::abs(r.value(0, p)) == doctest::Approx(2.0 / pi * std::sin(0.7) * std::sin(1.9)).epsilon(1e-13));
    CHECK(r.mu(1) == doctest::Approx(5.0));
    CHECK(r.mu(2) == doctest::Approx(5.0));

    const EigenBasis n = eigenpairs(ModelDomain::rectangle(pi, 2.0), BoundaryCondition::neumann(), 10);
    CHECK(n.mu(0) == 0.0);
    CHECK(n.value(0, {1.0, 1.0}) == doctest::Approx(1.0 / std::sqrt(2.0 * pi)));
    for (std::size_t k = 1; k < n.size(); ++k) CHECK(n.mu(k) >= n.mu(k - 1));
}

TEST_CASE("prefixes of larger bases agree") {
    const auto dom = ModelDomain::rectangle(pi, 2.3);
    for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(), BoundaryCondition::robin(0.8)}) {
        const EigenBasis small = eigenpairs(dom, bc, 50);
        const EigenBasis big = eigenpairs(dom, bc, 400);
        for (std::size_t k = 0; k < small.size(); ++k) {
            CHECK(small.mu(k) == doctest::Approx(big.mu(k)).epsilon(1e-14));
            CHECK(small.mode(k).ix == big.mode(k).ix);
            CHECK(small.mode(k).iy == big.mode(k).iy);
        }
    }
}

TEST_CASE("Robin frequencies") {
    // tools/oracles/constants.py (mpmath findroot)
    CHECK(robin_frequency(1.0, 1.0, 1) == doctest::Approx(1.3065423741888062022).epsilon(1e-12));
    CHECK(robin_frequency(1.0, 1.0, 2) == doctest::Approx(3.6731944063042514455).epsilon(1e-12));
    CHECK(robin_frequency(pi, 0.5, 3) == doctest::Approx(2.1457440346042629564).epsilon(1e-12));
    const double w = robin_frequency(1.0, 1.0, 1);
    CHECK(w > 0.0);
    CHECK(w < pi);
    CHECK(std::abs(std::tan(w) - 2.0 * w / (w * w - 1.0)) < 1e-10);
    CHECK_THROWS_AS(robin_frequency(1.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("Robin modes are normalized and satisfy the boundary condition") {
    const double beta = 0.9, len = 2.5;
    const auto modes = axis_modes(0.0, len, BoundaryCondition::robin(beta), 6);
    for (const auto& m : modes) {
        CHECK(m.derivative(0.0) == doctest::Approx(beta * m.value(0.0)).epsilon(1e-10));
        CHECK(-m.derivative(len) == doctest::Approx(beta * m.value(len)).epsilon(1e-10));
        const double norm = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return m.value(x) * m.value(x); }, 0.0, len, 8, 1e-14);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
    const double ortho = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return modes[1].value(x) * modes[4].value(x); }, 0.0, len, 8, 1e-14);
    CHECK(std::abs(ortho) < 1e-12);
}

TEST_CASE("solution operator and Sobolev norms") {
    const auto basis = std::make_shared<const EigenBasis>(
        eigenpairs(ModelDomain::rectangle(pi, pi), BoundaryCondition::dirichlet(), 4));
    Vector e1 = Vector::Zero(4);
    e1[0] = 1.0;
    const SpectralField f(basis, e1);
    CHECK(apply_solution_operator(f, 1.0).coefficients()[0] == doctest::Approx(1.0 / 3.0));
    CHECK(apply_solution_operator(SpectralField(basis, Vector::Zero(4)), 1.0).coefficients().norm() == 0.0);
    CHECK(sobolev_norm(f, -2.0) == doctest::Approx(1.0 / 3.0));
    Vector c(4);
    c << 0.3, -1.2, 0.5, 2.0;
    const SpectralField g(basis, c);
    CHECK(sobolev_norm(g, 0.0) == doctest::Approx(c.norm()));
    CHECK(sobolev_norm(g, -1.0) < sobolev_norm(g, -0.5));

    const auto nb = std::make_shared<const EigenBasis>(
        eigenpairs(ModelDomain::rectangle(pi, pi), BoundaryCondition::neumann(), 3));
    Vector k0 = Vector::Zero(3);
    k0[0] = 4.0;
    CHECK(apply_solution_operator(SpectralField(nb, k0), 2.0).coefficients()[0] == doctest::Approx(2.0));
}

TEST_CASE("covariance function oracles") {
    const auto dom = ModelDomain::rectangle(pi, pi);
    const Point c{pi / 2, pi / 2};
    const SeriesValue dv = covariance_function(dom, BoundaryCondition::dirichlet(), c, c, 1.0, 4000);
    CHECK(std::abs(dv.value - dirichlet_center_variance) <= dv.tail_bound + 1e-13);
    CHECK(dv.tail_bound < 1e-6 * dv.value);
    const SeriesValue nv = covariance_function(dom, BoundaryCondition::neumann(), c, c, 1.0, 4000);
    CHECK(std::abs(nv.value - neumann_center_variance) <= nv.tail_bound + 1e-13);
    CHECK(nv.tail_bound < 1e-6 * nv.value);

    const EigenBasis basis = eigenpairs(dom, BoundaryCondition::neumann(), 500);
    const Point x{0.4, 2.2}, y{1.9, 0.3};
    CHECK(covariance_function(x, y, 1.0, basis).value == covariance_function(y, x, 1.0, basis).value);
    const SeriesValue sorted = covariance_function(x, y, 1.0, basis);
    const SeriesValue box = covariance_function(dom, BoundaryCondition::neumann(), x, y, 1.0, 3000);
    CHECK(std::abs(sorted.value - box.value) <= sorted.tail_bound + box.tail_bound);

    const EigenBasis db = eigenpairs(dom, BoundaryCondition::dirichlet(), 200);
    CHECK(covariance_function({0.0, 1.0}, {0.0, 1.0}, 1.0, db).value == 0.0);
    CHECK(covariance_function({pi, pi}, {1.0, 1.0}, 1.0, db).value == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("1D Green's functions") {
    for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(), BoundaryCondition::robin(1.5)}) {
        const double lambda = 2.0;
        CHECK(greens_function_1d(0.3, 0.8, lambda, bc) == greens_function_1d(0.8, 0.3, lambda, bc));
        const double y = 0.45, dx = 1e-4;
        for (double x : {0.15, 0.3, 0.7, 0.9}) {
            const double g0 = greens_function_1d(x, y, lambda, bc);
            const double gp = greens_function_1d(x + dx, y, lambda, bc);
            const double gm = greens_function_1d(x - dx, y, lambda, bc);
            const double res = -(gp - 2 * g0 + gm) / (dx * dx) + lambda * g0;
            CHECK(std::abs(res) < 1e-6);
        }
        // jump of -∂x G across the diagonal is 1
        const double h = 1e-7;
        const double left = (greens_function_1d(y, y, lambda, bc) - greens_function_1d(y - h, y, lambda, bc)) / h;
        const double right = (greens_function_1d(y + h, y, lambda, bc) - greens_function_1d(y, y, lambda, bc)) / h;
        CHECK(left - right == doctest::Approx(1.0).epsilon(1e-5));
    }
    for (double y : {0.1, 0.5, 0.99}) CHECK(greens_function_1d(0.0, y, 1.0, BoundaryCondition::dirichlet()) == 0.0);
    // agreement with the eigen-expansion on (0, 1)
    const EigenBasis b = eigenpairs(ModelDomain::interval(0.0, 1.0), BoundaryCondition::robin(1.5), 4000);
    double s = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) s += b.value(k, {0.2, 0}) * b.value(k, {0.6, 0}) / (b.mu(k) + 2.0);
    CHECK(s == doctest::Approx(greens_function_1d(0.2, 0.6, 2.0, BoundaryCondition::robin(1.5))).epsilon(1e-4));
}

TEST_CASE("lattice tail bounds dominate the omitted sums") {
    const auto dom = ModelDomain::rectangle(pi, 2.0);
    for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(), BoundaryCondition::robin(0.5)}) {
        const EigenBasis big = eigenpairs(dom, bc, 20000);
        for (std::size_t m : {100, 1000}) {
            for (const auto& [a, b] : {std::pair{1.1, 2.0}, std::pair{0.0, 2.0}, std::pair{2.5, 0.0}}) {
                double direct = 0.0;
                for (std::size_t k = m; k < big.size(); ++k)
                    direct += std::pow(1.0 + big.mu(k), -a) * std::pow(big.mu(k) + 1.0, -b);
                const EigenBasis small = eigenpairs(dom, bc, m);
                CHECK(small.tail_bound(m, a, b, 1.0) >= direct);
            }
        }
    }
    // 1D integral comparison decays like K^{-3} for b = 2
    const EigenBasis line = eigenpairs(ModelDomain::interval(0.0, pi), BoundaryCondition::dirichlet(), 4000);
    const double t1 = line.tail_bound(1000, 0.0, 2.0, 1.0), t2 = line.tail_bound(2000, 0.0, 2.0, 1.0);
    CHECK(std::log2(t1 / t2) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("exact mode loads match high-order quadrature") {
    const auto dom = ModelDomain::rectangle(pi, 2.0);
    const Mesh mesh = build_rectangle_mesh(pi, 2.0, 3, 2);
    for (const auto& bc : {BoundaryCondition::neumann(), BoundaryCondition::robin(0.7), BoundaryCondition::dirichlet()}) {
        const EigenBasis basis = eigenpairs(dom, bc, 40);
        const ModeProjector proj(basis, mesh);
        for (std::size_t k : {0, 3, 17, 39}) {
            const Vector b = proj.load(k);
            // tensor Gauss-Kronrod on each triangle via the Duffy map
            Vector ref = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
            using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
            for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
                const auto& el = mesh.elements()[e];
                const Point& p0 = mesh.node(el[0]);
                const Point& p1 = mesh.node(el[1]);
                const Point& p2 = mesh.node(el[2]);
                const double area = mesh.element_measure(e);
                for (int loc = 0; loc < 3; ++loc) {
                    const double v = GK::integrate(
                        [&](double s) {
                            return GK::integrate(
                                [&](double t) {
                                    const double l1 = s * (1 - t), l2 = s * t, l0 = 1 - l1 - l2;
                                    const Point x{l0 * p0[0] + l1 * p1[0] + l2 * p2[0],
                                                  l0 * p0[1] + l1 * p1[1] + l2 * p2[1]};
                                    const double phi = loc == 0 ? l0 : (loc == 1 ? l1 : l2);
                                    return basis.value(k, x) * phi * s;
                                },
                                0.0, 1.0, 0, 1e-15);
                        },
                        0.0, 1.0, 0, 1e-15);
                    ref[el[loc]] += 2.0 * area * v;
                }
            }
            CHECK((b - ref).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("exact mode loads in 1D") {
    const auto dom = ModelDomain::interval(0.0, 1.0);
    const Mesh mesh = build_interval_mesh(0.0, 1.0, 5);
    const EigenBasis basis = eigenpairs(dom, BoundaryCondition::robin(2.0), 10);
    const ModeProjector proj(basis, mesh);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (std::size_t k = 0; k < 10; ++k) {
        const Vector b = proj.load(k);
        for (int i = 0; i <= 5; ++i) {
            const double xi = 0.2 * i;
            const double lo = std::max(0.0, xi - 0.2), hi = std::min(1.0, xi + 0.2);
            const auto f = [&](double x) { return basis.value(k, {x, 0}) * std::max(0.0, 1.0 - std::abs(x - xi) / 0.2); };
            const double ref = (lo < xi ? GK::integrate(f, lo, xi, 0, 1e-15) : 0.0) +
                               (xi < hi ? GK::integrate(f, xi, hi, 0, 1e-15) : 0.0);
            CHECK(b[i] == doctest::Approx(ref).epsilon(1e-11));
        }
    }
}
