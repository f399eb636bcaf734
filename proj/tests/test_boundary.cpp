#include "whitefem/boundary.hpp"
#include "whitefem/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace whitefem;

namespace {
constexpr double pi = std::numbers::pi;
MeshPtr square(int n) { return std::make_shared<const Mesh>(build_rectangle_mesh(pi, pi, n, n)); }

Vector random_vector(std::size_t n, std::uint64_t seed) {
    GaussianStream s(seed, 0);
    Vector v(static_cast<Eigen::Index>(n));
    s.fill_normal(v.begin(), v.end());
    return v;
}
}  // namespace

TEST_CASE("traces") {
    const auto mesh = square(4);
    const auto t = trace(FemFunction::constant(mesh, 2.5));
    CHECK(t.values().size() == 16);
    CHECK((t.values().array() == 2.5).all());
    CHECK(t.representation() == BoundaryRepresentation::Trace);

    const Vector a = random_vector(mesh->num_nodes(), 1), b = random_vector(mesh->num_nodes(), 2);
    const auto lhs = trace(FemFunction(mesh, a + b));
    const auto rhs = trace(FemFunction(mesh, a)) + trace(FemFunction(mesh, b));
    CHECK(lhs.values() == rhs.values());

    const DiscreteSolutionOperator op(mesh, BoundaryCondition::dirichlet(), 1.0);
    GaussianStream s(3, 0);
    CHECK(trace(sample_path(op, s)).values().cwiseAbs().maxCoeff() == 0.0);

    const BoundaryFunction f(mesh, Vector::Ones(16), BoundaryRepresentation::Functional);
    CHECK_THROWS_AS(t + f, InvalidArgument);
    CHECK_THROWS_AS(BoundaryFunction(mesh, Vector::Ones(3), BoundaryRepresentation::Trace), InvalidArgument);
}

TEST_CASE("scale-space basis layout") {
    const auto mesh = square(4);
    const ScaleSpaceBasis ss(*mesh);
    CHECK(ss.size() == 16);
    CHECK(ss.perimeter() == doctest::Approx(4 * pi));
    // arclength starts at the origin and runs counterclockwise
    const auto& bn = mesh->boundary_nodes();
    for (std::size_t i = 0; i < bn.size(); ++i) {
        const Point& p = mesh->node(static_cast<std::size_t>(bn[i]));
        double s = 0.0;
        if (p[1] == 0.0) s = p[0];
        else if (p[0] == pi) s = pi + p[1];
        else if (p[1] == pi) s = 3 * pi - p[0];
        else s = 4 * pi - p[1];
        CHECK(ss.arclength()[i] == doctest::Approx(s).epsilon(1e-14));
    }
    CHECK(ss.weight(0) == 1.0);
    CHECK(ss.weight(3) == 1.0 / 16);
    CHECK(ss.frequency(1) == ss.frequency(2));
    CHECK(ss.frequency(1) == doctest::Approx(0.5));

    const Mesh line = build_interval_mesh(0.0, 1.0, 3);
    const ScaleSpaceBasis two(line);
    CHECK(two.size() == 2);
    CHECK(two.weight(1) == 0.25);
}

TEST_CASE("scale-space norm") {
    const auto mesh = square(8);
    const FemMatrices mats = FemMatrices::assemble(*mesh);
    const ScaleSpaceBasis ss(*mesh);
    const Eigen::Index nb = static_cast<Eigen::Index>(mesh->boundary_nodes().size());
    CHECK(scale_space_norm(BoundaryFunction(mesh, Vector::Zero(nb), BoundaryRepresentation::Functional), ss).value == 0.0);

    const BoundaryFunction f1(mesh, Vector::Constant(nb, 1.0 / std::sqrt(ss.perimeter())), BoundaryRepresentation::Trace);
    CHECK(scale_space_norm(f1, ss, mats).value == doctest::Approx(1.0).epsilon(1e-13));

    const BoundaryFunction g(mesh, random_vector(static_cast<std::size_t>(nb), 4), BoundaryRepresentation::Functional);
    const double n1 = scale_space_norm(g, ss).value;
    CHECK(scale_space_norm(g * -2.5, ss).value == doctest::Approx(2.5 * n1).epsilon(1e-14));
    CHECK_THROWS_AS(scale_space_norm(f1, ss), InvalidArgument);

    const Mesh line = build_interval_mesh(0.0, 1.0, 4);
    const auto lp = std::make_shared<const Mesh>(line);
    Vector d(2);
    d << 3.0, 4.0;
    CHECK(scale_space_norm(BoundaryFunction(lp, d, BoundaryRepresentation::Functional), ScaleSpaceBasis(line)).value ==
          doctest::Approx(std::sqrt(9.0 + 4.0)));
}

TEST_CASE("weak conormal derivative") {
    const auto mesh = square(6);
    const FemMatrices mats = FemMatrices::assemble(*mesh);
    const double lambda = 2.0;
    const Vector load = mats.mass * Vector::Ones(static_cast<Eigen::Index>(mesh->num_nodes()));
    const auto d = weak_conormal_derivative(FemFunction::constant(mesh, 1.0 / lambda), load, lambda, mats);
    CHECK(d.values().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(d.representation() == BoundaryRepresentation::Functional);

    const Vector c = random_vector(mesh->num_nodes(), 8), b = random_vector(mesh->num_nodes(), 9);
    const auto d1 = weak_conormal_derivative(FemFunction(mesh, c), b, lambda, mats);
    const auto d2 = weak_conormal_derivative(FemFunction(mesh, 2.0 * c), 2.0 * b, lambda, mats);
    CHECK((d2.values() - 2.0 * d1.values()).cwiseAbs().maxCoeff() < 1e-13);

    const DiscreteSolutionOperator op(mesh, BoundaryCondition::neumann(), 1.0);
    GaussianStream s(12, 0);
    Vector z(static_cast<Eigen::Index>(mesh->num_nodes()));
    s.fill_normal(z.begin(), z.end());
    const Vector bl = op.mass_factor().apply(z);
    const auto dn = weak_conormal_derivative(FemFunction(mesh, op.solve(bl)), bl, 1.0, mats);
    CHECK(dn.values().cwiseAbs().maxCoeff() < 1e-9);

    // Galerkin solution of a smooth load: the identity is algebraic
    Vector smooth(static_cast<Eigen::Index>(mesh->num_nodes()));
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i)
        smooth[static_cast<Eigen::Index>(i)] = std::cos(mesh->node(i)[0]) + mesh->node(i)[1];
    const Vector fl = mats.mass * smooth;
    const auto ds = weak_conormal_derivative(FemFunction(mesh, op.solve(fl)), fl, 1.0, mats);
    CHECK(ds.values().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Robin residual") {
    const auto mesh = square(6);
    const FemMatrices mats = FemMatrices::assemble(*mesh);
    const ScaleSpaceBasis ss(*mesh);
    const DiscreteSolutionOperator op(mesh, BoundaryCondition::robin(1.5), 1.0);
    GaussianStream s(13, 0);
    Vector z(static_cast<Eigen::Index>(mesh->num_nodes()));
    s.fill_normal(z.begin(), z.end());
    const Vector b = op.mass_factor().apply(z);
    const Vector c = op.solve(b);
    CHECK(robin_residual(FemFunction(mesh, c), b, 1.0, 1.5, mats, ss) <= 1e-9);

    const int node = mesh->boundary_nodes()[5];
    std::vector<double> res;
    for (double eps : {1e-3, 2e-3, 4e-3}) {
        Vector cp = c;
        cp[node] += eps;
        res.push_back(robin_residual(FemFunction(mesh, cp), b, 1.0, 1.5, mats, ss));
    }
    CHECK(res[0] > 0.0);
    CHECK(res[1] == doctest::Approx(2 * res[0]).epsilon(1e-4));
    CHECK(res[2] == doctest::Approx(4 * res[0]).epsilon(1e-4));

    const Vector rc = random_vector(mesh->num_nodes(), 3);
    const FemFunction u(mesh, rc);
    CHECK(robin_residual(u, b, 1.0, 0.0, mats, ss) ==
          scale_space_norm(weak_conormal_derivative(u, b, 1.0, mats), ss).value);
}

TEST_CASE("measurable trace series") {
    const auto mesh = square(8);
    const auto dom = ModelDomain::rectangle(pi, pi);
    for (const auto& bc : {BoundaryCondition::neumann(), BoundaryCondition::robin(1.0), BoundaryCondition::dirichlet()}) {
        const DiscreteSolutionOperator op(mesh, bc, 1.0);
        const EigenBasis basis = eigenpairs(dom, bc, 200);
        const CameronMartinSystem cm(op, basis);
        REQUIRE(cm.size() == op.system().num_unknowns());
        // energy orthonormality
        for (std::size_t i : {0, 5, 30})
            for (std::size_t j : {0, 5, 30})
                CHECK(op.system().energy_inner(cm.vector(i), cm.vector(j)) ==
                      doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));

        GaussianStream s(21, 0);
        const auto full = measurable_trace_series(cm, s, cm.size());
        CHECK((full.series.values() - trace(full.path).values()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(measurable_trace_series(cm, full.load, 0).values().cwiseAbs().maxCoeff() == 0.0);
        CHECK_THROWS_AS(measurable_trace_series(cm, full.load, cm.size() + 1), InvalidArgument);

        const auto res = cm.energy_residuals(full.load);
        for (std::size_t m = 1; m < res.size(); ++m) CHECK(res[m] <= res[m - 1] + 1e-14);
        CHECK(res.back() < 1e-12 * res.front());
    }
}

TEST_CASE("Cameron-Martin completion with too few eigenfunctions") {
    const auto mesh = square(4);
    const DiscreteSolutionOperator op(mesh, BoundaryCondition::neumann(), 1.0);
    const CameronMartinSystem cm(op, eigenpairs(ModelDomain::rectangle(pi, pi), BoundaryCondition::neumann(), 5));
    CHECK(cm.spectral_count() == 5);
    CHECK(cm.size() == 25);
    GaussianStream s(2, 0);
    const auto full = measurable_trace_series(cm, s, cm.size());
    CHECK((full.series.values() - trace(full.path).values()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("boundary csv export") {
    const auto mesh = square(2);
    const ScaleSpaceBasis ss(*mesh);
    const auto t = trace(FemFunction::constant(mesh, 1.0));
    std::ostringstream out;
    write_boundary_csv(out, t, ss);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "arclength,value");
    double prev = -1.0;
    int rows = 0;
    while (std::getline(in, line)) {
        const double s = std::stod(line.substr(0, line.find(',')));
        CHECK(s > prev);
        prev = s;
        ++rows;
    }
    CHECK(rows == 8);
}
