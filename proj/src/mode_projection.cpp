#include "whitefem/mode_projection.hpp"

#include "whitefem/error.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace whitefem {

namespace {

using Complex = std::complex<double>;

struct EdgeMoments {
    Complex m0;  // ∫_0^1 E(P + s d) ds
    Complex m1;  // ∫_0^1 s E(P + s d) ds
};

// E(x) = exp(i k·x) along an edge with E(P) = ea, E(Q) = eb, θ = k·(Q - P).
EdgeMoments edge_moments(Complex ea, Complex eb, double theta) {
    if (std::abs(theta) > 0.5) {
        const Complex it(0.0, theta);
        const Complex diff = eb - ea;
        return {diff / it, eb / it + diff / (theta * theta)};
    }
    const Complex it(0.0, theta);
    Complex term(1.0, 0.0);
    Complex s0(0.0, 0.0), s1(0.0, 0.0);
    for (int n = 0; n < 24; ++n) {
        s0 += term / static_cast<double>(n + 1);
        s1 += term / static_cast<double>(n + 2);
        term *= it / static_cast<double>(n + 1);
    }
    return {ea * s0, ea * s1};
}

Complex amplitude(const Mode1D& m) {
    return Complex(m.cos_coef, -m.sin_coef) * std::polar(1.0, -m.omega * m.origin);
}

// Separable product f(x) g(y) = ½ Re[ap E+ + am E-] with E± = exp(i(ωx x ± ωy y)).
struct Separable {
    Complex ap;
    Complex am;
};

struct ModeTables {
    double wx = 0.0;
    double wy = 0.0;
    std::vector<Complex> ep;
    std::vector<Complex> em;
};

ModeTables phases(const Mesh& mesh, const Mode1D& fx, const Mode1D& fy) {
    ModeTables t;
    t.wx = fx.omega;
    t.wy = fy.omega;
    const std::size_t n = mesh.num_nodes();
    t.ep.resize(n);
    t.em.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = mesh.nodes()[i];
        const Complex ex = std::polar(1.0, t.wx * p[0]);
        const Complex ey = std::polar(1.0, t.wy * p[1]);
        t.ep[i] = ex * ey;
        t.em[i] = ex * std::conj(ey);
    }
    return t;
}

struct EdgeIntegrals {
    double i0;  // ∫_0^1 h(P + s d) ds
    double i1;  // ∫_0^1 s h(P + s d) ds
};

EdgeIntegrals edge_integrals(const ModeTables& t, const Separable& h, int a, int b, const Point& pa,
                             const Point& pb) {
    const double dx = pb[0] - pa[0];
    const double dy = pb[1] - pa[1];
    const EdgeMoments plus = edge_moments(t.ep[a], t.ep[b], t.wx * dx + t.wy * dy);
    const EdgeMoments minus = edge_moments(t.em[a], t.em[b], t.wx * dx - t.wy * dy);
    return {0.5 * std::real(h.ap * plus.m0 + h.am * minus.m0), 0.5 * std::real(h.ap * plus.m1 + h.am * minus.m1)};
}

}  // namespace

ModeProjector::ModeProjector(const EigenBasis& basis, const Mesh& mesh) : basis_(basis), mesh_(mesh) {
    if (mesh.dim() != basis.domain().dim()) throw InvalidArgument("ModeProjector: mesh and basis dimensions differ");
    for (const auto& p : mesh.nodes())
        if (!basis.domain().contains(p, 1e-10)) throw InvalidArgument("ModeProjector: mesh node outside the domain");
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    hat_integrals_ = Vector::Zero(n);
    boundary_hat_integrals_ = Vector::Zero(n);
    const int nv = mesh.dim() + 1;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double share = mesh.element_measure(e) / nv;
        for (int k = 0; k < nv; ++k) hat_integrals_[mesh.elements()[e][k]] += share;
    }
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        const auto& fc = mesh.facets()[f];
        if (mesh.dim() == 1) {
            boundary_hat_integrals_[fc.nodes[0]] += 1.0;
        } else {
            const double half = 0.5 * mesh.facet_measure(f);
            boundary_hat_integrals_[fc.nodes[0]] += half;
            boundary_hat_integrals_[fc.nodes[1]] += half;
        }
    }
}

Vector ModeProjector::interpolant(std::size_t k) const {
    Vector v(static_cast<Eigen::Index>(mesh_.num_nodes()));
    for (std::size_t i = 0; i < mesh_.num_nodes(); ++i) v[static_cast<Eigen::Index>(i)] = basis_.value(k, mesh_.nodes()[i]);
    return v;
}

Vector ModeProjector::load(std::size_t k) const {
    const EigenMode& mode = basis_.mode(k);
    const double mu = mode.mu;
    if (mu == 0.0) return hat_integrals_ / std::sqrt(basis_.domain().measure());

    const auto& nodes = mesh_.nodes();
    Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh_.num_nodes()));
    const Mode1D& fx = basis_.x_modes()[static_cast<std::size_t>(mode.ix)];

    if (mesh_.dim() == 1) {
        for (const auto& el : mesh_.elements()) {
            int l = el[0], r = el[1];
            if (nodes[l][0] > nodes[r][0]) std::swap(l, r);
            const double len = nodes[r][0] - nodes[l][0];
            const double rise = (fx.value(nodes[r][0]) - fx.value(nodes[l][0])) / len;
            b[l] -= rise;
            b[r] += rise;
        }
        for (std::size_t f = 0; f < mesh_.num_facets(); ++f) {
            const int i = mesh_.facets()[f].nodes[0];
            b[i] -= outward_normal_1d(mesh_, f) * fx.derivative(nodes[i][0]);
        }
        return b / mu;
    }

    const Mode1D& fy = basis_.y_modes()[static_cast<std::size_t>(mode.iy)];
    const ModeTables t = phases(mesh_, fx, fy);
    const Complex f = amplitude(fx);
    const Complex g = amplitude(fy);
    const Complex df = Complex(0.0, fx.omega) * f;
    const Complex dg = Complex(0.0, fy.omega) * g;
    const Separable value{f * g, f * std::conj(g)};
    const Separable ddx{df * g, df * std::conj(g)};
    const Separable ddy{f * dg, f * std::conj(dg)};

    // Σ_T ∇φ_i · ∫_T ∇e, with ∫_T ∇e = Σ_edges (dy, -dx) ∫ e.
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
        const auto& el = mesh_.elements()[e];
        double gx = 0.0, gy = 0.0;
        for (int k0 = 0; k0 < 3; ++k0) {
            const int a = el[k0], c = el[(k0 + 1) % 3];
            const EdgeIntegrals ei = edge_integrals(t, value, a, c, nodes[a], nodes[c]);
            gx += (nodes[c][1] - nodes[a][1]) * ei.i0;
            gy -= (nodes[c][0] - nodes[a][0]) * ei.i0;
        }
        const double two_area = 2.0 * mesh_.element_measure(e);
        for (int i = 0; i < 3; ++i) {
            const Point& pj = nodes[el[(i + 1) % 3]];
            const Point& pk = nodes[el[(i + 2) % 3]];
            b[el[i]] += ((pj[1] - pk[1]) * gx + (pk[0] - pj[0]) * gy) / two_area;
        }
    }
    // - ∮ ∂_n e φ_i.
    for (std::size_t fct = 0; fct < mesh_.num_facets(); ++fct) {
        const auto [a, c] = oriented_facet(mesh_, fct);
        const double dx = nodes[c][0] - nodes[a][0];
        const double dy = nodes[c][1] - nodes[a][1];
        const Separable flux{dy * ddx.ap - dx * ddy.ap, dy * ddx.am - dx * ddy.am};
        const EdgeIntegrals ei = edge_integrals(t, flux, a, c, nodes[a], nodes[c]);
        b[a] -= ei.i0 - ei.i1;
        b[c] -= ei.i1;
    }
    return b / mu;
}

Vector ModeProjector::boundary_load(std::size_t k) const {
    const EigenMode& mode = basis_.mode(k);
    if (mode.mu == 0.0) return boundary_hat_integrals_ / std::sqrt(basis_.domain().measure());
    const auto& nodes = mesh_.nodes();
    Vector g = Vector::Zero(static_cast<Eigen::Index>(mesh_.num_nodes()));
    const Mode1D& fx = basis_.x_modes()[static_cast<std::size_t>(mode.ix)];
    if (mesh_.dim() == 1) {
        for (const auto& fc : mesh_.facets()) g[fc.nodes[0]] += fx.value(nodes[fc.nodes[0]][0]);
        return g;
    }
    const Mode1D& fy = basis_.y_modes()[static_cast<std::size_t>(mode.iy)];
    const ModeTables t = phases(mesh_, fx, fy);
    const Complex f = amplitude(fx);
    const Complex gy = amplitude(fy);
    const Separable value{f * gy, f * std::conj(gy)};
    for (std::size_t fct = 0; fct < mesh_.num_facets(); ++fct) {
        const auto& fc = mesh_.facets()[fct];
        const int a = fc.nodes[0], c = fc.nodes[1];
        const double len = mesh_.facet_measure(fct);
        const EdgeIntegrals ei = edge_integrals(t, value, a, c, nodes[a], nodes[c]);
        g[a] += len * (ei.i0 - ei.i1);
        g[c] += len * ei.i1;
    }
    return g;
}

}  // namespace whitefem
