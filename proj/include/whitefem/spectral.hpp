#pragma once

#include "whitefem/fem.hpp"
#include "whitefem/kernels.hpp"
#include "whitefem/linear_solver.hpp"
#include "whitefem/mesh.hpp"

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

namespace whitefem {

struct Interval {
    double a = 0.0;
    double b = 1.0;
};

/// (0, lx) x (0, ly).
struct Rectangle {
    double lx = 1.0;
    double ly = 1.0;
};

/// Domains on which the spectrum of -Δ is known in closed form.
class ModelDomain {
public:
    static ModelDomain interval(double a, double b);
    static ModelDomain rectangle(double lx, double ly);

    int dim() const noexcept { return std::holds_alternative<Interval>(shape_) ? 1 : 2; }
    const std::variant<Interval, Rectangle>& shape() const noexcept { return shape_; }

    /// Left end and length of the x extent; y extent is (0, ly) in 2D.
    double x0() const noexcept;
    double lx() const noexcept;
    double ly() const noexcept;
    double measure() const noexcept;

    bool contains(const Point& p, double tol = 1e-12) const noexcept;

    /// Uniform mesh with nx cells along x and ny (default nx) along y.
    Mesh mesh(int nx, int ny = 0) const;

private:
    explicit ModelDomain(std::variant<Interval, Rectangle> shape) : shape_(shape) {}
    std::variant<Interval, Rectangle> shape_;
};

/// c cos(ω(x - x0)) + s sin(ω(x - x0)), an L²-normalized eigenfunction of
/// -d²/dx² on one axis.
struct Mode1D {
    double omega = 0.0;
    double cos_coef = 0.0;
    double sin_coef = 0.0;
    double origin = 0.0;

    double mu() const noexcept { return omega * omega; }
    double value(double x) const noexcept;
    double derivative(double x) const noexcept;
    /// Upper bound of value(x)² over the real line.
    double sup_sq() const noexcept { return cos_coef * cos_coef + sin_coef * sin_coef; }
};

/// k-th positive root (k >= 1) of (ω² - β²) sin(ωL) - 2βω cos(ωL),
/// located in ((k-1)π/L, kπ/L) by bisection to 1e-12.
double robin_frequency(double length, double beta, int k);

/// First `count` axis modes of the interval (origin, origin + length).
std::vector<Mode1D> axis_modes(double origin, double length, const BoundaryCondition& bc, std::size_t count);

/// Tensor index of a mode: positions into the axis mode tables (iy = -1 in 1D).
struct EigenMode {
    double mu = 0.0;
    int ix = 0;
    int iy = -1;
};

/// Leading eigenpairs of -Δ with a homogeneous boundary condition, sorted by
/// (μ, ix, iy). The enumeration is complete: every mode with eigenvalue below
/// the last one is present, so prefixes of larger bases agree.
class EigenBasis {
public:
    EigenBasis(ModelDomain domain, BoundaryCondition bc, std::vector<Mode1D> x_modes, std::vector<Mode1D> y_modes,
               std::vector<EigenMode> modes);

    const ModelDomain& domain() const noexcept { return domain_; }
    const BoundaryCondition& bc() const noexcept { return bc_; }
    std::size_t size() const noexcept { return modes_.size(); }
    const EigenMode& mode(std::size_t k) const { return modes_.at(k); }
    double mu(std::size_t k) const { return modes_.at(k).mu; }
    const std::vector<Mode1D>& x_modes() const noexcept { return x_modes_; }
    const std::vector<Mode1D>& y_modes() const noexcept { return y_modes_; }

    double value(std::size_t k, const Point& p) const;
    std::array<double, 2> gradient(std::size_t k, const Point& p) const;

    /// Bound on sup |e(x)|² valid for every eigenfunction, in or out of the basis.
    double sup_sq_bound() const noexcept { return sup_sq_; }

    /// Bound on Σ (1+μ)^-a (μ+λ)^-b over all modes after the first `m`,
    /// including those beyond the basis.
    double tail_bound(std::size_t m, double a, double b, double lambda) const;

private:
    ModelDomain domain_;
    BoundaryCondition bc_;
    std::vector<Mode1D> x_modes_;
    std::vector<Mode1D> y_modes_;
    std::vector<EigenMode> modes_;
    double sup_sq_ = 0.0;
};

EigenBasis eigenpairs(const ModelDomain& domain, const BoundaryCondition& bc, std::size_t count);

/// Bound on sup |e(x)|² over all modes of one axis beyond the `computed` given.
double axis_sup_sq_bound(double length, const BoundaryCondition& bc, const std::vector<Mode1D>& computed);

/// Lattice comparison bounds. Every axis mode with index n (0-based) has
/// frequency in [nπ/L, (n+1)π/L]; these bound Σ (1+μ)^-a (μ+λ)^-b over the
/// lattice points at distance >= r0 from the origin, by integral comparison.
/// Returns +inf when the series diverges.
double lattice_tail_1d(double delta, double r0, double a, double b, double lambda);
double lattice_tail_2d(double delta_x, double delta_y, double r0, double a, double b, double lambda);

/// A truncated sum together with a rigorous bound on what was left out.
struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

/// Coefficients in an eigenbasis (a prefix of it).
class SpectralField {
public:
    SpectralField(std::shared_ptr<const EigenBasis> basis, Vector coefficients);

    const EigenBasis& basis() const noexcept { return *basis_; }
    const std::shared_ptr<const EigenBasis>& basis_ptr() const noexcept { return basis_; }
    const Vector& coefficients() const noexcept { return coefficients_; }
    std::size_t truncation() const noexcept { return static_cast<std::size_t>(coefficients_.size()); }

    double value(const Point& p) const;

private:
    std::shared_ptr<const EigenBasis> basis_;
    Vector coefficients_;
};

/// Exact solution operator of -Δu + λu = f: c_k / (μ_k + λ).
SpectralField apply_solution_operator(const SpectralField& f, double lambda);

/// (Σ (1 + μ_k)^s c_k²)^{1/2}.
double sobolev_norm(const SpectralField& f, double s);

/// Σ_k e_k(x) e_k(y) / (μ_k + λ)² over the basis, with tail bound.
SeriesValue covariance_function(const Point& x, const Point& y, double lambda, const EigenBasis& basis);

/// Same kernel on a rectangle summed over the full box of axis indices
/// 0 <= i, j < n_per_axis (separable evaluation).
SeriesValue covariance_function(const ModelDomain& domain, const BoundaryCondition& bc, const Point& x,
                                const Point& y, double lambda, std::size_t n_per_axis,
                                const ExecutionPolicy& policy = {});

/// Closed-form kernel of (-d²/dx² + λ)^{-1} on (0, 1).
double greens_function_1d(double x, double y, double lambda, const BoundaryCondition& bc);

}  // namespace whitefem
