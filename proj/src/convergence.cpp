#include "whitefem/convergence.hpp"

#include "whitefem/error.hpp"
#include "whitefem/mode_projection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace whitefem {

double galerkin_mode_error_sq(double mu, double lambda, double b_dot_c, double c_mass_c) {
    const double s = mu + lambda;
    return 1.0 / (s * s) - 2.0 * b_dot_c / s + c_mass_c;
}

namespace {

// ∫_{∂D} e² for an L²-normalized separable mode.
double boundary_square(const EigenBasis& basis, std::size_t k) {
    const EigenMode& m = basis.mode(k);
    const ModelDomain& d = basis.domain();
    const Mode1D& fx = basis.x_modes()[static_cast<std::size_t>(m.ix)];
    const double x0 = d.x0(), x1 = d.x0() + d.lx();
    const double ex = fx.value(x0) * fx.value(x0) + fx.value(x1) * fx.value(x1);
    if (m.iy < 0) return ex;
    const Mode1D& fy = basis.y_modes()[static_cast<std::size_t>(m.iy)];
    const double ey = fy.value(0.0) * fy.value(0.0) + fy.value(d.ly()) * fy.value(d.ly());
    return ex + ey;
}

struct ModeTerms {
    double error_sq = 0.0;
    double c_mass_c = 0.0;
    double h1_error_sq = 0.0;
};

}  // namespace

LevelError fem_error_level(const ModelDomain& domain, const MeshPtr& mesh, const BoundaryCondition& bc,
                           double lambda, double r, const FemErrorOptions& options) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!(r > domain.dim() / 2.0 - 1.0)) throw InvalidArgument("r must exceed d/2 - 1");
    if (options.initial_basis == 0 || options.max_basis < options.initial_basis)
        throw InvalidArgument("invalid basis limits");

    const DiscreteSolutionOperator op(mesh, bc, lambda);
    const double trace = expected_l2_norm_sq(op, options.policy);
    const FemMatrices& mats = op.matrices();
    const double beta = bc.beta();

    std::vector<ModeTerms> terms;
    std::size_t count = std::min(options.initial_basis, options.max_basis);
    for (;;) {
        const EigenBasis basis = eigenpairs(domain, bc, count);
        const ModeProjector projector(basis, *mesh);
        const std::size_t done = terms.size();
        terms.resize(count);
        parallel_for(options.policy, count - done, [&](std::size_t q) {
            const std::size_t k = done + q;
            const double mu = basis.mu(k);
            const Vector b = projector.load(k);
            const Vector c = op.solve(b);
            const Vector mc = mats.mass * c;
            ModeTerms t;
            t.c_mass_c = c.dot(mc);
            const double bc_dot = b.dot(c);
            t.error_sq = std::pow(1.0 + mu, -r) * galerkin_mode_error_sq(mu, lambda, bc_dot, t.c_mass_c);
            if (k < options.h1_modes) {
                const double s = mu + lambda;
                const double g_dot = beta != 0.0 ? projector.boundary_load(k).dot(c) : 0.0;
                const double e_sq = (mu + 1.0 - beta * boundary_square(basis, k)) / (s * s);
                const double cross = ((mu + 1.0) * bc_dot - beta * g_dot) / s;
                const double uh_sq = c.dot(mats.stiffness * c) + t.c_mass_c;
                t.h1_error_sq = e_sq - 2.0 * cross + uh_sq;
            }
            terms[k] = t;
        });

        std::vector<double> err(count), cmc(count), hs(count);
        double h1_sup = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            err[k] = terms[k].error_sq;
            cmc[k] = terms[k].c_mass_c;
            hs[k] = std::pow(1.0 + basis.mu(k), -r - 1.0);
            h1_sup = std::max(h1_sup, terms[k].h1_error_sq);
        }
        const double partial = pairwise_sum(err);
        const double mu_cut = basis.mu(count - 1);
        // ||(T - T_h)e||² <= 2||Te||² + 2||T_h e||², and Σ_ℓ ||T_h e_ℓ||² = tr(A⁻¹MA⁻¹M).
        const double discrete_rest = std::max(0.0, trace - pairwise_sum(cmc));
        const double tail = 2.0 * basis.tail_bound(count, r, 2.0, lambda) +
                            2.0 * std::pow(1.0 + mu_cut, -r) * discrete_rest;
        const bool converged = tail <= options.target_tail * partial;
        if (converged || count >= options.max_basis) {
            if (!converged && tail > options.max_tail * partial)
                throw NumericalError(fmt::format(
                    "error tail bound {:.3e} exceeds {:.0f}% of the partial sum {:.3e} with {} modes; increase the basis cap",
                    tail, 100.0 * options.max_tail, partial, count));
            LevelError level;
            level.h = mesh->h();
            level.error_sq = partial;
            level.tail_bound = tail;
            level.basis_count = count;
            level.h1_sup = h1_sup;
            level.hs_factor = pairwise_sum(hs);
            level.upper_bound = level.hs_factor * h1_sup;
            level.unknowns = op.system().num_unknowns();
            return level;
        }
        count = std::min(2 * count, options.max_basis);
    }
}

ErrorReport deterministic_fem_error(const ModelDomain& domain, const std::vector<MeshPtr>& meshes,
                                    const BoundaryCondition& bc, double lambda, double r,
                                    const FemErrorOptions& options) {
    if (meshes.empty()) throw InvalidArgument("deterministic_fem_error needs at least one mesh");
    ErrorReport report;
    report.bc = bc;
    report.lambda = lambda;
    report.r = r;
    for (const auto& m : meshes) report.levels.push_back(fem_error_level(domain, m, bc, lambda, r, options));
    std::stable_sort(report.levels.begin(), report.levels.end(),
                     [](const LevelError& a, const LevelError& b) { return a.h > b.h; });
    for (const auto& l : report.levels) report.basis_count = std::max(report.basis_count, l.basis_count);
    if (report.levels.size() >= 3) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& l : report.levels) pts.emplace_back(l.h, l.error_sq);
        const RateFit fit = fit_rate(pts);
        report.fitted_rate = fit.rate;
        report.fit_residual = fit.residual;
    }
    return report;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& levels) {
    if (levels.size() < 3) throw InvalidArgument("fit_rate needs at least 3 levels");
    const auto n = static_cast<double>(levels.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx, ly;
    for (const auto& [h, v] : levels) {
        if (!(h > 0.0) || !(v > 0.0)) throw InvalidArgument("fit_rate needs positive h and values");
        lx.push_back(std::log(h));
        ly.push_back(std::log(v));
        sx += lx.back();
        sy += ly.back();
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_rate needs at least two distinct h");
    RateFit fit;
    fit.rate = sxy / sxx;
    fit.intercept = my - fit.rate * mx;
    for (std::size_t i = 0; i < lx.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(ly[i] - fit.intercept - fit.rate * lx[i]));
    return fit;
}

SeriesValue truncation_error_closed_form(const EigenBasis& basis, double lambda, double r, std::size_t m) {
    if (m > basis.size()) throw InvalidArgument(fmt::format("truncation {} exceeds the basis size {}", m, basis.size()));
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    std::vector<double> terms;
    terms.reserve(basis.size() - m);
    for (std::size_t k = m; k < basis.size(); ++k) {
        const double s = basis.mu(k) + lambda;
        terms.push_back(std::pow(1.0 + basis.mu(k), -r) / (s * s));
    }
    return {pairwise_sum(terms), basis.tail_bound(basis.size(), r, 2.0, lambda)};
}

SeriesValue embedding_hs_factor(const EigenBasis& basis, double r) {
    std::vector<double> terms(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) terms[k] = std::pow(1.0 + basis.mu(k), -r - 1.0);
    return {pairwise_sum(terms), basis.tail_bound(basis.size(), r + 1.0, 0.0, 1.0)};
}

L2Diagnostic l2_realization_diagnostic(const EigenBasis& basis, double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    L2Diagnostic d;
    d.partial_sums.reserve(basis.size());
    std::vector<double> terms(basis.size());
    double running = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double s = basis.mu(k) + lambda;
        terms[k] = 1.0 / (s * s);
        running += terms[k];
        d.partial_sums.push_back(running);
    }
    d.total = {pairwise_sum(terms), basis.tail_bound(basis.size(), 0.0, 2.0, lambda)};
    return d;
}

HolderFit holder_modulus(const DiscreteSolutionOperator& op, const std::vector<std::pair<Point, Point>>& pairs) {
    if (pairs.size() < 3) throw InvalidArgument("holder_modulus needs at least 3 point pairs");
    HolderFit fit;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : pairs) {
        const double d = std::hypot(x[0] - y[0], x[1] - y[1]);
        if (!(d > 0.0)) throw InvalidArgument("holder_modulus: coincident points");
        const double v = increment_variance(op, x, y);
        fit.separations.push_back(d);
        fit.increments.push_back(v);
        pts.emplace_back(d, v);
    }
    const RateFit rf = fit_rate(pts);
    fit.alpha = rf.rate / 2.0;
    fit.log_c = rf.intercept;
    fit.c = std::exp(rf.intercept);
    fit.residual = rf.residual;
    return fit;
}

}  // namespace whitefem
