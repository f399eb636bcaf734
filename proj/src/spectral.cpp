#include "whitefem/spectral.hpp"

#include "whitefem/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace whitefem {

using std::numbers::pi;

ModelDomain ModelDomain::interval(double a, double b) {
    if (!(a < b)) throw InvalidArgument("interval requires a < b");
    return ModelDomain(Interval{a, b});
}

ModelDomain ModelDomain::rectangle(double lx, double ly) {
    if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidArgument("rectangle requires positive side lengths");
    return ModelDomain(Rectangle{lx, ly});
}

double ModelDomain::x0() const noexcept {
    if (const auto* i = std::get_if<Interval>(&shape_)) return i->a;
    return 0.0;
}

double ModelDomain::lx() const noexcept {
    if (const auto* i = std::get_if<Interval>(&shape_)) return i->b - i->a;
    return std::get<Rectangle>(shape_).lx;
}

double ModelDomain::ly() const noexcept {
    if (const auto* r = std::get_if<Rectangle>(&shape_)) return r->ly;
    return 0.0;
}

double ModelDomain::measure() const noexcept { return dim() == 1 ? lx() : lx() * ly(); }

bool ModelDomain::contains(const Point& p, double tol) const noexcept {
    const double ex = tol * lx();
    if (p[0] < x0() - ex || p[0] > x0() + lx() + ex) return false;
    if (dim() == 1) return true;
    const double ey = tol * ly();
    return p[1] >= -ey && p[1] <= ly() + ey;
}

Mesh ModelDomain::mesh(int nx, int ny) const {
    if (dim() == 1) return build_interval_mesh(x0(), x0() + lx(), nx);
    return build_rectangle_mesh(lx(), ly(), nx, ny > 0 ? ny : nx);
}

double Mode1D::value(double x) const noexcept {
    const double t = omega * (x - origin);
    return cos_coef * std::cos(t) + sin_coef * std::sin(t);
}

double Mode1D::derivative(double x) const noexcept {
    const double t = omega * (x - origin);
    return omega * (sin_coef * std::cos(t) - cos_coef * std::sin(t));
}

namespace {

double robin_characteristic(double omega, double length, double beta) {
    return (omega * omega - beta * beta) * std::sin(omega * length) - 2.0 * beta * omega * std::cos(omega * length);
}

}  // namespace

double robin_frequency(double length, double beta, int k) {
    if (k < 1) throw InvalidArgument("robin_frequency: k must be >= 1");
    if (!(beta > 0.0) || !(length > 0.0)) throw InvalidArgument("robin_frequency: need beta > 0 and length > 0");
    double lo = (k - 1) * pi / length;
    double hi = k * pi / length;
    // F < 0 just right of zero, so the first bracket has a known left sign.
    const double f_lo = k == 1 ? -1.0 : robin_characteristic(lo, length, beta);
    const double f_hi = robin_characteristic(hi, length, beta);
    if (!(f_lo * f_hi < 0.0))
        throw NumericalError(fmt::format("Robin root bracket [{:.17g}, {:.17g}] has no sign change", lo, hi));
    const bool lo_negative = f_lo < 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = robin_characteristic(mid, length, beta);
        if (f == 0.0) return mid;
        if ((f < 0.0) == lo_negative)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Mode1D> axis_modes(double origin, double length, const BoundaryCondition& bc, std::size_t count) {
    if (!(length > 0.0)) throw InvalidArgument("axis_modes: length must be positive");
    std::vector<Mode1D> modes;
    modes.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        Mode1D m;
        m.origin = origin;
        switch (bc.kind()) {
            case BoundaryKind::Dirichlet:
                m.omega = static_cast<double>(n + 1) * pi / length;
                m.sin_coef = std::sqrt(2.0 / length);
                break;
            case BoundaryKind::Neumann:
                m.omega = static_cast<double>(n) * pi / length;
                m.cos_coef = n == 0 ? 1.0 / std::sqrt(length) : std::sqrt(2.0 / length);
                break;
            case BoundaryKind::Robin: {
                const double beta = bc.beta();
                const double w = robin_frequency(length, beta, static_cast<int>(n + 1));
                const double s2 = std::sin(2.0 * w * length) / (4.0 * w);
                const double sl = std::sin(w * length);
                const double ratio = beta / w;
                const double norm_sq = length / 2.0 + s2 + ratio * ratio * (length / 2.0 - s2) + beta * sl * sl / (w * w);
                const double norm = std::sqrt(norm_sq);
                m.omega = w;
                m.cos_coef = 1.0 / norm;
                m.sin_coef = ratio / norm;
                break;
            }
        }
        modes.push_back(m);
    }
    return modes;
}

double axis_sup_sq_bound(double length, const BoundaryCondition& bc, const std::vector<Mode1D>& computed) {
    if (bc.kind() != BoundaryKind::Robin) return 2.0 / length;
    double s = 0.0;
    for (const auto& m : computed) s = std::max(s, m.sup_sq());
    // Beyond the table ω >= Kπ/L and N² >= (1 + β²/ω²)(L/2 - 1/(4ω)).
    const double w_next = std::max<double>(1.0, static_cast<double>(computed.size())) * pi / length;
    return std::max(s, 1.0 / (length / 2.0 - 1.0 / (4.0 * w_next)));
}

namespace {

struct WeightBound {
    double factor;
    double c;
    double p;
};

// (1+μ)^-a (μ+λ)^-b <= factor (c + μ)^-p for μ >= 0.
WeightBound bound_weight(double a, double b, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("lattice tail requires lambda > 0");
    if (a > 0.0) return {1.0, std::min(1.0, lambda), a + b};
    if (a == 0.0) return {1.0, lambda, b};
    return {lambda < 1.0 ? std::pow(lambda, a) : 1.0, lambda, a + b};
}

double integrand(const WeightBound& w, double rho) { return w.factor * std::pow(w.c + rho * rho, -w.p); }

// ∫_T^∞ (c + ρ²)^-p dρ for p > 1/2.
double radial_integral_1d(const WeightBound& w, double t) {
    const double q = 2.0 * w.p - 1.0;
    if (t >= 1.0) return w.factor * std::pow(t, -q) / q;
    return w.factor * (std::pow(w.c, -w.p) * (1.0 - std::max(t, 0.0)) + 1.0 / q);
}

// Σ_{n >= n0} f(nδ).
double axis_sum(const WeightBound& w, double delta, double n0) {
    return integrand(w, n0 * delta) + radial_integral_1d(w, n0 * delta) / delta;
}

}  // namespace

double lattice_tail_1d(double delta, double r0, double a, double b, double lambda) {
    const WeightBound w = bound_weight(a, b, lambda);
    if (!(w.p > 0.5)) return std::numeric_limits<double>::infinity();
    const double n0 = std::max(0.0, std::ceil(r0 / delta));
    return axis_sum(w, delta, n0);
}

double lattice_tail_2d(double delta_x, double delta_y, double r0, double a, double b, double lambda) {
    const WeightBound w = bound_weight(a, b, lambda);
    if (!(w.p > 1.0)) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    if (r0 <= 0.0) total += integrand(w, 0.0);
    total += axis_sum(w, delta_x, std::max(1.0, std::ceil(r0 / delta_x)));
    total += axis_sum(w, delta_y, std::max(1.0, std::ceil(r0 / delta_y)));
    const double diag = std::hypot(delta_x, delta_y);
    const double r1 = std::max(0.0, r0 - diag);
    total += w.factor * pi * std::pow(w.c + r1 * r1, 1.0 - w.p) / (4.0 * delta_x * delta_y * (w.p - 1.0));
    return total;
}

EigenBasis::EigenBasis(ModelDomain domain, BoundaryCondition bc, std::vector<Mode1D> x_modes,
                       std::vector<Mode1D> y_modes, std::vector<EigenMode> modes)
    : domain_(domain), bc_(bc), x_modes_(std::move(x_modes)), y_modes_(std::move(y_modes)), modes_(std::move(modes)) {
    if (modes_.empty()) throw InvalidArgument("EigenBasis needs at least one mode");
    sup_sq_ = axis_sup_sq_bound(domain_.lx(), bc_, x_modes_);
    if (domain_.dim() == 2) sup_sq_ *= axis_sup_sq_bound(domain_.ly(), bc_, y_modes_);
}

double EigenBasis::value(std::size_t k, const Point& p) const {
    const EigenMode& m = modes_.at(k);
    double v = x_modes_[static_cast<std::size_t>(m.ix)].value(p[0]);
    if (m.iy >= 0) v *= y_modes_[static_cast<std::size_t>(m.iy)].value(p[1]);
    return v;
}

std::array<double, 2> EigenBasis::gradient(std::size_t k, const Point& p) const {
    const EigenMode& m = modes_.at(k);
    const Mode1D& fx = x_modes_[static_cast<std::size_t>(m.ix)];
    if (m.iy < 0) return {fx.derivative(p[0]), 0.0};
    const Mode1D& fy = y_modes_[static_cast<std::size_t>(m.iy)];
    return {fx.derivative(p[0]) * fy.value(p[1]), fx.value(p[0]) * fy.derivative(p[1])};
}

double EigenBasis::tail_bound(std::size_t m, double a, double b, double lambda) const {
    const double mu_cut = m == 0 ? 0.0 : (m < modes_.size() ? modes_[m].mu : modes_.back().mu);
    const double dx = pi / domain_.lx();
    if (domain_.dim() == 1) {
        const double r0 = m == 0 ? 0.0 : std::sqrt(mu_cut) - dx;
        return lattice_tail_1d(dx, r0, a, b, lambda);
    }
    const double dy = pi / domain_.ly();
    const double r0 = m == 0 ? 0.0 : std::sqrt(mu_cut) - std::hypot(dx, dy);
    return lattice_tail_2d(dx, dy, r0, a, b, lambda);
}

EigenBasis eigenpairs(const ModelDomain& domain, const BoundaryCondition& bc, std::size_t count) {
    if (count == 0) throw InvalidArgument("eigenpairs: count must be positive");
    if (domain.dim() == 1) {
        auto xm = axis_modes(domain.x0(), domain.lx(), bc, count);
        std::vector<EigenMode> modes(count);
        for (std::size_t k = 0; k < count; ++k) modes[k] = EigenMode{xm[k].mu(), static_cast<int>(k), -1};
        return EigenBasis(domain, bc, std::move(xm), {}, std::move(modes));
    }
    auto k_axis = static_cast<std::size_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(count)))) + 4;
    for (;;) {
        auto xm = axis_modes(0.0, domain.lx(), bc, k_axis + 1);
        auto ym = axis_modes(0.0, domain.ly(), bc, k_axis + 1);
        const double cutoff = std::min(xm[k_axis].mu(), ym[k_axis].mu());
        std::vector<EigenMode> modes;
        for (std::size_t i = 0; i < k_axis; ++i) {
            if (xm[i].mu() >= cutoff) break;
            for (std::size_t j = 0; j < k_axis; ++j) {
                const double mu = xm[i].mu() + ym[j].mu();
                if (mu >= cutoff) break;
                modes.push_back(EigenMode{mu, static_cast<int>(i), static_cast<int>(j)});
            }
        }
        if (modes.size() >= count) {
            std::sort(modes.begin(), modes.end(), [](const EigenMode& a, const EigenMode& b) {
                if (a.mu != b.mu) return a.mu < b.mu;
                if (a.ix != b.ix) return a.ix < b.ix;
                return a.iy < b.iy;
            });
            modes.resize(count);
            xm.resize(k_axis);
            ym.resize(k_axis);
            return EigenBasis(domain, bc, std::move(xm), std::move(ym), std::move(modes));
        }
        k_axis *= 2;
    }
}

SpectralField::SpectralField(std::shared_ptr<const EigenBasis> basis, Vector coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
    if (!basis_) throw InvalidArgument("SpectralField requires a basis");
    if (static_cast<std::size_t>(coefficients_.size()) > basis_->size())
        throw InvalidArgument(fmt::format("SpectralField has {} coefficients for a basis of {} modes",
                                          coefficients_.size(), basis_->size()));
    if (!coefficients_.allFinite()) throw InvalidArgument("SpectralField coefficients must be finite");
}

double SpectralField::value(const Point& p) const {
    double v = 0.0;
    for (Eigen::Index k = 0; k < coefficients_.size(); ++k)
        v += coefficients_[k] * basis_->value(static_cast<std::size_t>(k), p);
    return v;
}

SpectralField apply_solution_operator(const SpectralField& f, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    Vector c = f.coefficients();
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] /= f.basis().mu(static_cast<std::size_t>(k)) + lambda;
    return SpectralField(f.basis_ptr(), std::move(c));
}

double sobolev_norm(const SpectralField& f, double s) {
    std::vector<double> terms(f.truncation());
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const double c = f.coefficients()[static_cast<Eigen::Index>(k)];
        terms[k] = std::pow(1.0 + f.basis().mu(k), s) * c * c;
    }
    return std::sqrt(pairwise_sum(terms));
}

SeriesValue covariance_function(const Point& x, const Point& y, double lambda, const EigenBasis& basis) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!basis.domain().contains(x) || !basis.domain().contains(y))
        throw InvalidArgument("covariance_function: point outside domain");
    std::vector<double> terms(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double d = basis.mu(k) + lambda;
        terms[k] = basis.value(k, x) * basis.value(k, y) / (d * d);
    }
    return {pairwise_sum(terms), basis.sup_sq_bound() * basis.tail_bound(basis.size(), 0.0, 2.0, lambda)};
}

SeriesValue covariance_function(const ModelDomain& domain, const BoundaryCondition& bc, const Point& x,
                                const Point& y, double lambda, std::size_t n_per_axis,
                                const ExecutionPolicy& policy) {
    if (domain.dim() != 2) throw InvalidArgument("box covariance sum needs a rectangle");
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (n_per_axis == 0) throw InvalidArgument("box covariance sum needs at least one mode per axis");
    if (!domain.contains(x) || !domain.contains(y)) throw InvalidArgument("covariance_function: point outside domain");
    const auto xm = axis_modes(0.0, domain.lx(), bc, n_per_axis);
    const auto ym = axis_modes(0.0, domain.ly(), bc, n_per_axis);
    std::vector<double> ax(n_per_axis), mx(n_per_axis), ay(n_per_axis), my(n_per_axis);
    for (std::size_t i = 0; i < n_per_axis; ++i) {
        ax[i] = xm[i].value(x[0]) * xm[i].value(y[0]);
        mx[i] = xm[i].mu();
        ay[i] = ym[i].value(x[1]) * ym[i].value(y[1]);
        my[i] = ym[i].mu();
    }
    const double value = separable_inverse_square_sum(ax, mx, ay, my, lambda, policy);
    const double dx = pi / domain.lx();
    const double dy = pi / domain.ly();
    const double r0 = static_cast<double>(n_per_axis) * std::min(dx, dy);
    const double sup = axis_sup_sq_bound(domain.lx(), bc, xm) * axis_sup_sq_bound(domain.ly(), bc, ym);
    return {value, sup * lattice_tail_2d(dx, dy, r0, 0.0, 2.0, lambda)};
}

double greens_function_1d(double x, double y, double lambda, const BoundaryCondition& bc) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) throw InvalidArgument("greens_function_1d: arguments must lie in [0, 1]");
    const double k = std::sqrt(lambda);
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    switch (bc.kind()) {
        case BoundaryKind::Dirichlet:
            return std::sinh(k * lo) * std::sinh(k * (1.0 - hi)) / (k * std::sinh(k));
        case BoundaryKind::Neumann:
            return std::cosh(k * lo) * std::cosh(k * (1.0 - hi)) / (k * std::sinh(k));
        case BoundaryKind::Robin: {
            const double b = bc.beta();
            const double u1 = k * std::cosh(k * lo) + b * std::sinh(k * lo);
            const double u2 = k * std::cosh(k * (1.0 - hi)) + b * std::sinh(k * (1.0 - hi));
            const double w = k * ((k * k + b * b) * std::sinh(k) + 2.0 * b * k * std::cosh(k));
            return u1 * u2 / w;
        }
    }
    return 0.0;
}

}  // namespace whitefem
