#include "whitefem/experiment.hpp"

#include "whitefem/boundary.hpp"
#include "whitefem/convergence.hpp"
#include "whitefem/error.hpp"
#include "whitefem/kernels.hpp"
#include "whitefem/mesh_io.hpp"
#include "whitefem/rng.hpp"
#include "whitefem/spectral.hpp"
#include "whitefem/stochastic.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <variant>

namespace whitefem {

using Json = nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Solve: return "solve";
        case ExperimentKind::Sample: return "sample";
        case ExperimentKind::Covariance: return "covariance";
        case ExperimentKind::Converge: return "converge";
        case ExperimentKind::Truncate: return "truncate";
        case ExperimentKind::Holder: return "holder";
        case ExperimentKind::L2Diag: return "l2diag";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
    for (auto k : {ExperimentKind::Solve, ExperimentKind::Sample, ExperimentKind::Covariance, ExperimentKind::Converge,
                   ExperimentKind::Truncate, ExperimentKind::Holder, ExperimentKind::L2Diag})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, fmt::format("expected a number, got '{}'", text));
    if (!std::isfinite(v)) throw ConfigError(key, "value must be finite");
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, fmt::format("expected an integer, got '{}'", text));
    return v;
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

std::string join_points(const std::vector<Point>& pts, int dim) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += "; ";
        out += dim == 1 ? fmt_double(pts[i][0]) : fmt_double(pts[i][0]) + " " + fmt_double(pts[i][1]);
    }
    return out;
}

template <class T>
std::string join_list(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "experiment") {
        const auto k = parse_experiment_kind(value);
        if (!k) throw ConfigError(key, fmt::format("unknown experiment '{}'", value));
        experiment = *k;
    } else if (key == "domain") {
        if (value != "rectangle" && value != "interval" && value != "mesh")
            throw ConfigError(key, fmt::format("expected rectangle, interval or mesh, got '{}'", value));
        domain = value;
    } else if (key == "lx") {
        lx = parse_double(key, value);
    } else if (key == "ly") {
        ly = parse_double(key, value);
    } else if (key == "a") {
        a = parse_double(key, value);
    } else if (key == "b") {
        b = parse_double(key, value);
    } else if (key == "mesh_file") {
        mesh_file = value;
    } else if (key == "bc") {
        if (value == "dirichlet") bc = BoundaryKind::Dirichlet;
        else if (value == "neumann") bc = BoundaryKind::Neumann;
        else if (value == "robin") bc = BoundaryKind::Robin;
        else throw ConfigError(key, fmt::format("expected dirichlet, neumann or robin, got '{}'", value));
    } else if (key == "beta") {
        beta = parse_double(key, value);
    } else if (key == "lambda") {
        lambda = parse_double(key, value);
    } else if (key == "r") {
        r = parse_double(key, value);
    } else if (key == "levels") {
        levels.clear();
        for (const auto& item : split(value, ',')) levels.push_back(parse_int<int>(key, item));
    } else if (key == "seed") {
        seed = parse_int<std::uint64_t>(key, value);
    } else if (key == "samples") {
        samples = parse_int<std::size_t>(key, value);
    } else if (key == "truncations") {
        truncations.clear();
        for (const auto& item : split(value, ',')) truncations.push_back(parse_int<std::size_t>(key, item));
    } else if (key == "modes") {
        modes = parse_int<std::size_t>(key, value);
    } else if (key == "points") {
        points.clear();
        for (const auto& item : split(value, ';')) {
            std::string coords = item;
            std::replace(coords.begin(), coords.end(), ',', ' ');
            std::istringstream in(coords);
            std::vector<double> xs;
            std::string tok;
            while (in >> tok) xs.push_back(parse_double(key, tok));
            if (xs.empty() || xs.size() > 2) throw ConfigError(key, fmt::format("bad point '{}'", item));
            points.push_back({xs[0], xs.size() == 2 ? xs[1] : 0.0});
        }
    } else if (key == "holder_pairs") {
        holder_pairs = parse_int<std::size_t>(key, value);
    } else if (key == "holder_min") {
        holder_min = parse_double(key, value);
    } else if (key == "holder_max") {
        holder_max = parse_double(key, value);
    } else if (key == "check_rate_min") {
        check_rate_min = parse_double(key, value);
    } else if (key == "check_rate_max") {
        check_rate_max = parse_double(key, value);
    } else if (key == "outdir") {
        outdir = value;
    } else if (key == "workers") {
        workers = parse_int<int>(key, value);
    } else {
        throw ConfigError(key, "unknown key");
    }
    explicit_keys[key] = value;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& source) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("{}:{}", source, lineno), fmt::format("expected 'key = value', got '{}'", line));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(fmt::format("{}:{}", source, lineno), "missing key");
        if (cfg.explicit_keys.count(key)) throw ConfigError(key, "set more than once");
        cfg.set(key, line.substr(eq + 1));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", fmt::format("cannot open '{}'", path));
    return parse(in, path);
}

int ExperimentConfig::dim() const {
    if (domain == "interval") return 1;
    if (domain == "rectangle") return 2;
    return load_mesh_file(mesh_file).dim();
}

double ExperimentConfig::effective_r() const { return r ? *r : dim() / 2.0 - 1.0 + 0.1; }

BoundaryCondition ExperimentConfig::boundary_condition() const {
    switch (bc) {
        case BoundaryKind::Dirichlet: return BoundaryCondition::dirichlet();
        case BoundaryKind::Neumann: return BoundaryCondition::neumann();
        case BoundaryKind::Robin:
            if (!beta) throw ConfigError("beta", "required when bc = robin");
            return BoundaryCondition::robin(*beta);
    }
    throw ConfigError("bc", "unknown boundary condition");
}

namespace {

double default_lx(const ExperimentConfig& c) { return c.lx > 0.0 || c.explicit_keys.count("lx") ? c.lx : std::numbers::pi; }
double default_ly(const ExperimentConfig& c) { return c.ly > 0.0 || c.explicit_keys.count("ly") ? c.ly : std::numbers::pi; }

bool needs_model_domain(ExperimentKind k) {
    return k == ExperimentKind::Converge || k == ExperimentKind::Truncate || k == ExperimentKind::L2Diag;
}

std::optional<ModelDomain> model_domain(const ExperimentConfig& c) {
    if (c.domain == "rectangle") return ModelDomain::rectangle(default_lx(c), default_ly(c));
    if (c.domain == "interval") return ModelDomain::interval(c.a, c.b);
    return std::nullopt;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (domain == "rectangle") {
        if (!(default_lx(*this) > 0.0)) throw ConfigError("lx", "must be positive");
        if (!(default_ly(*this) > 0.0)) throw ConfigError("ly", "must be positive");
    } else if (domain == "interval") {
        if (!(b > a)) throw ConfigError("b", "interval needs b > a");
    } else {
        if (mesh_file.empty()) throw ConfigError("mesh_file", "required when domain = mesh");
        try {
            (void)load_mesh_file(mesh_file);
        } catch (const Error& e) {
            throw ConfigError("mesh_file", e.what());
        }
        if (needs_model_domain(experiment))
            throw ConfigError("domain", fmt::format("{} needs a rectangle or interval", to_string(experiment)));
    }
    if (!(lambda > 0.0)) throw ConfigError("lambda", "must be positive");
    if (bc == BoundaryKind::Robin) {
        if (!beta) throw ConfigError("beta", "required when bc = robin");
        if (!(*beta > 0.0)) throw ConfigError("beta", "must be positive");
    }
    const int d = dim();
    if (!(effective_r() > d / 2.0 - 1.0)) throw ConfigError("r", fmt::format("must exceed d/2 - 1 = {}", d / 2.0 - 1.0));
    if (levels.empty()) throw ConfigError("levels", "at least one level is required");
    for (int n : levels)
        if (n < 1) throw ConfigError("levels", "cells per axis must be positive");
    if (workers < 0) throw ConfigError("workers", "must be >= 0");
    if (modes < 1) throw ConfigError("modes", "must be positive");
    for (std::size_t m : truncations)
        if (m > modes) throw ConfigError("truncations", fmt::format("{} exceeds modes = {}", m, modes));
    if ((experiment == ExperimentKind::Sample) && samples < 2) throw ConfigError("samples", "need at least 2 samples");
    if (experiment == ExperimentKind::Truncate && truncations.empty())
        throw ConfigError("truncations", "at least one truncation is required");
    if (experiment == ExperimentKind::Holder) {
        if (holder_pairs < 3) throw ConfigError("holder_pairs", "need at least 3 pairs");
        if (!(holder_min > 0.0)) throw ConfigError("holder_min", "must be positive");
        if (!(holder_max > holder_min)) throw ConfigError("holder_max", "must exceed holder_min");
    }
    if (check_rate_min || check_rate_max) {
        if (experiment != ExperimentKind::Converge) throw ConfigError("check_rate_min", "only used by converge");
        if (levels.size() < 3) throw ConfigError("levels", "a rate check needs at least 3 levels");
    }
    if (const auto dom = model_domain(*this)) {
        for (const auto& p : points)
            if (!dom->contains(p)) throw ConfigError("points", fmt::format("({}, {}) is outside the domain", p[0], p[1]));
    }
}

std::string ExperimentConfig::canonical() const {
    std::map<std::string, std::string> kv;
    kv["experiment"] = to_string(experiment);
    kv["domain"] = domain;
    if (domain == "rectangle") {
        kv["lx"] = fmt_double(default_lx(*this));
        kv["ly"] = fmt_double(default_ly(*this));
    } else if (domain == "interval") {
        kv["a"] = fmt_double(a);
        kv["b"] = fmt_double(b);
    } else {
        kv["mesh_file"] = mesh_file;
    }
    kv["bc"] = to_string(bc);
    if (bc == BoundaryKind::Robin && beta) kv["beta"] = fmt_double(*beta);
    kv["lambda"] = fmt_double(lambda);
    if (r) kv["r"] = fmt_double(*r);
    kv["levels"] = join_list(levels);
    kv["seed"] = std::to_string(seed);
    kv["samples"] = std::to_string(samples);
    kv["truncations"] = join_list(truncations);
    kv["modes"] = std::to_string(modes);
    const int d = domain == "interval" ? 1 : 2;
    if (!points.empty()) kv["points"] = join_points(points, d);
    kv["holder_pairs"] = std::to_string(holder_pairs);
    kv["holder_min"] = fmt_double(holder_min);
    kv["holder_max"] = fmt_double(holder_max);
    if (check_rate_min) kv["check_rate_min"] = fmt_double(*check_rate_min);
    if (check_rate_max) kv["check_rate_max"] = fmt_double(*check_rate_max);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string ExperimentConfig::hash_hex() const { return fmt::format("{:016x}", hash()); }

namespace {

using Cell = std::variant<double, long long, std::string>;

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<Cell> row) {
        if (row.size() != header_.size()) throw Error("table row has the wrong width");
        rows_.push_back(std::move(row));
    }
    void write(std::ostream& out, const std::string& meta_line) const {
        out << meta_line << '\n';
        for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
        out << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                if (const auto* d = std::get_if<double>(&row[i])) {
                    if (std::isnan(*d)) out << "nan";
                    else if (std::isinf(*d)) out << (*d > 0 ? "inf" : "-inf");
                    else out << fmt_double(*d);
                } else if (const auto* n = std::get_if<long long>(&row[i])) {
                    out << *n;
                } else {
                    out << std::get<std::string>(row[i]);
                }
            }
            out << '\n';
        }
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    MeanSe out;
    out.mean = pairwise_sum(v) / n;
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - out.mean) * (v[i] - out.mean);
    out.se = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
    return out;
}

struct Context {
    const ExperimentConfig& cfg;
    std::optional<ModelDomain> domain;
    BoundaryCondition bc;
    ExecutionPolicy policy;
    std::vector<std::pair<int, MeshPtr>> meshes;
    Json report;
    std::optional<Table> table;
    int exit_code = 0;
    std::string summary;
};

std::vector<std::pair<int, MeshPtr>> build_meshes(const ExperimentConfig& cfg, const std::optional<ModelDomain>& dom) {
    std::vector<std::pair<int, MeshPtr>> out;
    if (!dom) {
        out.emplace_back(0, std::make_shared<const Mesh>(load_mesh_file(cfg.mesh_file)));
        return out;
    }
    for (int n : cfg.levels) out.emplace_back(n, std::make_shared<const Mesh>(dom->mesh(n)));
    return out;
}

Point domain_center(const Context& ctx) {
    if (ctx.domain) {
        if (ctx.domain->dim() == 1) return {ctx.domain->x0() + 0.5 * ctx.domain->lx(), 0.0};
        return {0.5 * ctx.domain->lx(), 0.5 * ctx.domain->ly()};
    }
    const Mesh& m = *ctx.meshes.front().second;
    Point lo = m.nodes().front(), hi = lo;
    for (const auto& p : m.nodes()) {
        lo = {std::min(lo[0], p[0]), std::min(lo[1], p[1])};
        hi = {std::max(hi[0], p[0]), std::max(hi[1], p[1])};
    }
    return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
}

std::vector<Point> evaluation_points(const Context& ctx) {
    if (!ctx.cfg.points.empty()) return ctx.cfg.points;
    return {domain_center(ctx)};
}

void run_solve(Context& ctx) {
    ctx.table.emplace(std::vector<std::string>{"level", "h", "unknowns", "relative_residual", "l2_norm", "h1_norm",
                                               "conormal_residual"});
    Json levels = Json::array();
    for (const auto& [n, mesh] : ctx.meshes) {
        const GalerkinSystem sys(mesh, ctx.bc, ctx.cfg.lambda);
        const FemMatrices& mats = sys.matrices();
        const Vector load = mats.mass * Vector::Ones(static_cast<Eigen::Index>(mesh->num_nodes()));
        const Vector c = sys.solve(load);
        const double res = sys.relative_residual(c, load);
        const double l2 = std::sqrt(c.dot(mats.mass * c));
        const double h1 = std::sqrt(c.dot(mats.stiffness * c) + c.dot(mats.mass * c));
        double conormal = nan;
        if (ctx.bc.kind() != BoundaryKind::Dirichlet) {
            const ScaleSpaceBasis ss(*mesh);
            conormal = robin_residual(FemFunction(mesh, c), load, ctx.cfg.lambda, ctx.bc.beta(), mats, ss);
        }
        ctx.table->add({static_cast<long long>(n), mesh->h(), static_cast<long long>(sys.num_unknowns()), res, l2, h1,
                        conormal});
        levels.push_back({{"level", n},
                          {"h", mesh->h()},
                          {"unknowns", sys.num_unknowns()},
                          {"relative_residual", res},
                          {"l2_norm", l2},
                          {"h1_norm", h1},
                          {"conormal_residual", number_or_null(conormal)}});
    }
    ctx.report["load"] = "constant 1";
    ctx.report["levels"] = levels;
    ctx.summary = fmt::format("solved {} level(s)", ctx.meshes.size());
}

void run_sample(Context& ctx) {
    const auto points = evaluation_points(ctx);
    const std::size_t n = ctx.cfg.samples;
    ctx.table.emplace(std::vector<std::string>{"level", "h", "unknowns", "samples", "mc_l2_sq", "mc_l2_sq_se",
                                               "exact_l2_sq", "l2_z", "max_point_cov_z", "max_conormal_residual"});
    Json levels = Json::array();
    for (const auto& [lvl, mesh] : ctx.meshes) {
        const DiscreteSolutionOperator op(mesh, ctx.bc, ctx.cfg.lambda);
        const FemMatrices& mats = op.matrices();
        const bool check_boundary = ctx.bc.kind() != BoundaryKind::Dirichlet;
        const ScaleSpaceBasis ss(*mesh);
        std::vector<std::vector<std::pair<int, double>>> probes;
        for (const auto& p : points) probes.push_back(basis_values(*mesh, p));
        std::vector<double> l2(n), resid(n, 0.0);
        DenseMatrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(points.size()));
        parallel_for(ctx.policy, n, [&](std::size_t p) {
            GaussianStream stream(ctx.cfg.seed, p);
            Vector z(static_cast<Eigen::Index>(mesh->num_nodes()));
            stream.fill_normal(z.begin(), z.end());
            const Vector load = op.mass_factor().apply(z);
            const FemFunction x(mesh, op.solve(load));
            const Vector& c = x.coefficients();
            l2[p] = c.dot(mats.mass * c);
            for (std::size_t j = 0; j < probes.size(); ++j) {
                double v = 0.0;
                for (const auto& [i, w] : probes[j]) v += w * c[i];
                values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = v;
            }
            if (check_boundary) resid[p] = robin_residual(x, load, ctx.cfg.lambda, ctx.bc.beta(), mats, ss);
        });
        const MeanSe l2s = mean_se(l2);
        const double exact = expected_l2_norm_sq(op, ctx.policy);
        const MomentEstimate mom = sample_moments(values, ctx.policy);
        Json cov = Json::array();
        double max_z = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i; j < points.size(); ++j) {
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                const double ex = exact_discrete_covariance(op, points[i], points[j]);
                const double z = std::abs(mom.covariance(ii, jj) - ex) / mom.covariance_se(ii, jj);
                max_z = std::max(max_z, z);
                cov.push_back({{"i", i},
                               {"j", j},
                               {"mc", mom.covariance(ii, jj)},
                               {"se", mom.covariance_se(ii, jj)},
                               {"exact", ex},
                               {"z", z}});
            }
        const double max_resid = check_boundary ? *std::max_element(resid.begin(), resid.end()) : nan;
        const double l2z = std::abs(l2s.mean - exact) / l2s.se;
        ctx.table->add({static_cast<long long>(lvl), mesh->h(), static_cast<long long>(op.system().num_unknowns()),
                        static_cast<long long>(n), l2s.mean, l2s.se, exact, l2z, max_z, max_resid});
        levels.push_back({{"level", lvl},
                          {"h", mesh->h()},
                          {"mc_l2_sq", l2s.mean},
                          {"mc_l2_sq_se", l2s.se},
                          {"exact_l2_sq", exact},
                          {"l2_z", l2z},
                          {"point_covariance", cov},
                          {"max_conormal_residual", number_or_null(max_resid)}});
    }
    Json pts = Json::array();
    for (const auto& p : points) pts.push_back({p[0], p[1]});
    ctx.report["points"] = pts;
    ctx.report["samples"] = n;
    ctx.report["levels"] = levels;
    ctx.summary = fmt::format("sampled {} path(s) on {} level(s)", n, ctx.meshes.size());
}

SeriesValue continuum_covariance(const Context& ctx, const Point& x, const Point& y) {
    if (ctx.domain->dim() == 2)
        return covariance_function(*ctx.domain, ctx.bc, x, y, ctx.cfg.lambda, ctx.cfg.modes, ctx.policy);
    return covariance_function(x, y, ctx.cfg.lambda, eigenpairs(*ctx.domain, ctx.bc, ctx.cfg.modes));
}

void run_covariance(Context& ctx) {
    const auto points = evaluation_points(ctx);
    ctx.table.emplace(std::vector<std::string>{"level", "h", "i", "j", "discrete", "continuum", "continuum_tail",
                                               "relative_difference"});
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i; j < points.size(); ++j) pairs.emplace_back(i, j);
    std::vector<SeriesValue> oracle(pairs.size(), SeriesValue{nan, nan});
    if (ctx.domain)
        for (std::size_t q = 0; q < pairs.size(); ++q)
            oracle[q] = continuum_covariance(ctx, points[pairs[q].first], points[pairs[q].second]);
    Json levels = Json::array();
    for (const auto& [lvl, mesh] : ctx.meshes) {
        const DiscreteSolutionOperator op(mesh, ctx.bc, ctx.cfg.lambda);
        Json rows = Json::array();
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const auto [i, j] = pairs[q];
            const double disc = exact_discrete_covariance(op, points[i], points[j]);
            const double rel = std::abs(disc - oracle[q].value) / std::abs(oracle[q].value);
            ctx.table->add({static_cast<long long>(lvl), mesh->h(), static_cast<long long>(i), static_cast<long long>(j),
                            disc, oracle[q].value, oracle[q].tail_bound, rel});
            rows.push_back({{"i", i},
                            {"j", j},
                            {"discrete", disc},
                            {"continuum", number_or_null(oracle[q].value)},
                            {"continuum_tail", number_or_null(oracle[q].tail_bound)},
                            {"relative_difference", number_or_null(rel)}});
        }
        levels.push_back({{"level", lvl}, {"h", mesh->h()}, {"pairs", rows}});
    }
    Json pts = Json::array();
    for (const auto& p : points) pts.push_back({p[0], p[1]});
    ctx.report["points"] = pts;
    ctx.report["levels"] = levels;
    ctx.summary = fmt::format("covariance at {} pair(s) on {} level(s)", pairs.size(), ctx.meshes.size());
}

void run_converge(Context& ctx) {
    std::vector<MeshPtr> meshes;
    for (const auto& [n, m] : ctx.meshes) meshes.push_back(m);
    FemErrorOptions opts;
    opts.policy = ctx.policy;
    const double r = ctx.cfg.effective_r();
    const ErrorReport rep = deterministic_fem_error(*ctx.domain, meshes, ctx.bc, ctx.cfg.lambda, r, opts);
    ctx.table.emplace(std::vector<std::string>{"h", "error_sq", "tail_bound", "basis_count", "h1_sup", "hs_factor",
                                               "upper_bound", "bound_holds", "unknowns"});
    Json levels = Json::array();
    bool all_hold = true;
    for (const auto& l : rep.levels) {
        const bool holds = l.error_sq + l.tail_bound <= l.upper_bound;
        all_hold = all_hold && holds;
        ctx.table->add({l.h, l.error_sq, l.tail_bound, static_cast<long long>(l.basis_count), l.h1_sup, l.hs_factor,
                        l.upper_bound, static_cast<long long>(holds), static_cast<long long>(l.unknowns)});
        levels.push_back({{"h", l.h},
                          {"error_sq", l.error_sq},
                          {"tail_bound", l.tail_bound},
                          {"basis_count", l.basis_count},
                          {"h1_sup", l.h1_sup},
                          {"hs_factor", l.hs_factor},
                          {"upper_bound", l.upper_bound},
                          {"bound_holds", holds},
                          {"unknowns", l.unknowns}});
    }
    const bool fitted = rep.levels.size() >= 3;
    ctx.report["bc"] = to_string(rep.bc.kind());
    ctx.report["beta"] = rep.bc.beta();
    ctx.report["lambda"] = rep.lambda;
    ctx.report["r"] = rep.r;
    ctx.report["levels"] = levels;
    ctx.report["fitted_rate"] = fitted ? Json(rep.fitted_rate) : Json(nullptr);
    ctx.report["fit_residual"] = fitted ? Json(rep.fit_residual) : Json(nullptr);
    ctx.report["basis_count"] = rep.basis_count;
    ctx.report["upper_bound_holds"] = all_hold;
    ctx.summary = fitted ? fmt::format("fitted rate {:.4f} (residual {:.3g})", rep.fitted_rate, rep.fit_residual)
                         : fmt::format("{} level(s), no rate fit", rep.levels.size());
    if (ctx.cfg.check_rate_min || ctx.cfg.check_rate_max) {
        const double lo = ctx.cfg.check_rate_min.value_or(-std::numeric_limits<double>::infinity());
        const double hi = ctx.cfg.check_rate_max.value_or(std::numeric_limits<double>::infinity());
        const bool pass = rep.fitted_rate >= lo && rep.fitted_rate <= hi;
        ctx.report["rate_check"] = {{"min", number_or_null(lo)}, {"max", number_or_null(hi)}, {"pass", pass}};
        if (!pass) {
            ctx.exit_code = 4;
            ctx.summary += fmt::format("; outside [{}, {}]", lo, hi);
        }
    }
}

void run_truncate(Context& ctx) {
    const std::size_t big_m = ctx.cfg.modes;
    const EigenBasis basis = eigenpairs(*ctx.domain, ctx.bc, big_m);
    const double r = ctx.cfg.effective_r();
    const auto& ms = ctx.cfg.truncations;
    std::vector<double> weights(big_m);
    for (std::size_t k = 0; k < big_m; ++k) {
        const double s = basis.mu(k) + ctx.cfg.lambda;
        weights[k] = std::pow(1.0 + basis.mu(k), -r) / (s * s);
    }
    const std::size_t n = ctx.cfg.samples;
    DenseMatrix draws(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ms.size()));
    parallel_for(ctx.policy, n, [&](std::size_t p) {
        GaussianStream stream(ctx.cfg.seed, p);
        std::vector<double> xi(big_m);
        stream.fill_normal(xi.begin(), xi.end());
        std::vector<double> terms(big_m);
        for (std::size_t k = 0; k < big_m; ++k) terms[k] = weights[k] * xi[k] * xi[k];
        for (std::size_t q = 0; q < ms.size(); ++q)
            draws(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                pairwise_sum(std::span<const double>(terms).subspan(ms[q]));
    });
    ctx.table.emplace(std::vector<std::string>{"m", "error_sq", "tail_bound", "proxy_exact", "mc_mean", "mc_se", "z"});
    Json rows = Json::array();
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t m : sorted) {
        const double v = truncation_error_closed_form(basis, ctx.cfg.lambda, r, m).value;
        decreasing = decreasing && v < prev;
        prev = v;
    }
    for (std::size_t q = 0; q < ms.size(); ++q) {
        const SeriesValue cf = truncation_error_closed_form(basis, ctx.cfg.lambda, r, ms[q]);
        const double proxy = cf.value;
        double mc = nan, se = nan, z = nan;
        if (n >= 2) {
            std::vector<double> col(n);
            for (std::size_t p = 0; p < n; ++p)
                col[p] = draws(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
            const MeanSe s = mean_se(col);
            mc = s.mean;
            se = s.se;
            z = std::abs(mc - proxy) / se;
        }
        ctx.table->add({static_cast<long long>(ms[q]), cf.value, cf.tail_bound, proxy, mc, se, z});
        rows.push_back({{"m", ms[q]},
                        {"error_sq", cf.value},
                        {"tail_bound", cf.tail_bound},
                        {"proxy_exact", proxy},
                        {"mc_mean", number_or_null(mc)},
                        {"mc_se", number_or_null(se)},
                        {"z", number_or_null(z)}});
    }
    const SeriesValue total = truncation_error_closed_form(basis, ctx.cfg.lambda, r, 0);
    ctx.report["r"] = r;
    ctx.report["modes"] = big_m;
    ctx.report["samples"] = n;
    ctx.report["total"] = {{"value", total.value}, {"tail_bound", total.tail_bound}};
    ctx.report["strictly_decreasing"] = decreasing;
    ctx.report["truncations"] = rows;
    ctx.summary = fmt::format("{} truncation(s), strictly decreasing: {}", ms.size(), decreasing);
}

std::vector<std::pair<Point, Point>> holder_pairs(const Context& ctx) {
    const Point c = domain_center(ctx);
    const std::size_t k = ctx.cfg.holder_pairs;
    std::vector<std::pair<Point, Point>> pairs;
    for (std::size_t i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(k - 1);
        const double s = ctx.cfg.holder_min * std::pow(ctx.cfg.holder_max / ctx.cfg.holder_min, t);
        const Point x{c[0] - 0.5 * s, c[1]}, y{c[0] + 0.5 * s, c[1]};
        const bool inside = ctx.domain ? ctx.domain->contains(x) && ctx.domain->contains(y)
                                       : ctx.meshes.front().second->locate(x) && ctx.meshes.front().second->locate(y);
        if (!inside) throw ConfigError("holder_max", fmt::format("separation {} leaves the domain", s));
        pairs.emplace_back(x, y);
    }
    return pairs;
}

void run_holder(Context& ctx) {
    const auto pairs = holder_pairs(ctx);
    ctx.table.emplace(std::vector<std::string>{"level", "h", "separation", "increment_variance"});
    Json levels = Json::array();
    std::vector<HolderFit> fits;
    for (const auto& [lvl, mesh] : ctx.meshes) {
        const DiscreteSolutionOperator op(mesh, ctx.bc, ctx.cfg.lambda);
        const HolderFit fit = holder_modulus(op, pairs);
        for (std::size_t i = 0; i < fit.separations.size(); ++i)
            ctx.table->add({static_cast<long long>(lvl), mesh->h(), fit.separations[i], fit.increments[i]});
        levels.push_back({{"level", lvl},
                          {"h", mesh->h()},
                          {"alpha", fit.alpha},
                          {"c", fit.c},
                          {"log_c", fit.log_c},
                          {"fit_residual", fit.residual}});
        fits.push_back(fit);
    }
    ctx.report["levels"] = levels;
    if (fits.size() >= 2) {
        const auto& f0 = fits[fits.size() - 2];
        const auto& f1 = fits.back();
        ctx.report["alpha_change"] = std::abs(f1.alpha - f0.alpha);
        ctx.report["c_relative_change"] = std::abs(f1.c - f0.c) / f0.c;
    }
    ctx.summary = fmt::format("alpha {:.4f} on the finest level", fits.back().alpha);
}

void run_l2diag(Context& ctx) {
    const EigenBasis basis = eigenpairs(*ctx.domain, ctx.bc, ctx.cfg.modes);
    const L2Diagnostic diag = l2_realization_diagnostic(basis, ctx.cfg.lambda);
    ctx.table.emplace(std::vector<std::string>{"k", "mu", "partial_sum"});
    for (std::size_t k = 0; k < diag.partial_sums.size(); ++k)
        ctx.table->add({static_cast<long long>(k + 1), basis.mu(k), diag.partial_sums[k]});
    ctx.report["total"] = {{"value", diag.total.value},
                           {"tail_bound", number_or_null(diag.total.tail_bound)},
                           {"finite", std::isfinite(diag.total.tail_bound)}};
    ctx.report["modes"] = basis.size();
    if (ctx.cfg.samples >= 2) {
        const auto& mesh = ctx.meshes.back().second;
        const DiscreteSolutionOperator op(mesh, ctx.bc, ctx.cfg.lambda);
        std::vector<double> l2(ctx.cfg.samples);
        parallel_for(ctx.policy, l2.size(), [&](std::size_t p) {
            GaussianStream stream(ctx.cfg.seed, p);
            const Vector c = sample_path(op, stream).coefficients();
            l2[p] = c.dot(op.matrices().mass * c);
        });
        const MeanSe s = mean_se(l2);
        ctx.report["monte_carlo"] = {{"h", mesh->h()},
                                     {"samples", l2.size()},
                                     {"mean_l2_sq", s.mean},
                                     {"se", s.se},
                                     {"relative_difference", std::abs(s.mean - diag.total.value) / diag.total.value}};
    }
    ctx.summary = fmt::format("E||X||^2 = {:.10g} (tail <= {:.3g})", diag.total.value, diag.total.tail_bound);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    Context ctx{cfg, model_domain(cfg), cfg.boundary_condition(), ExecutionPolicy::openmp(cfg.workers), {}, Json::object(),
                std::nullopt, 0, {}};
    ctx.meshes = build_meshes(cfg, ctx.domain);
    if (!cfg.points.empty() && !ctx.domain)
        for (const auto& p : cfg.points)
            if (!ctx.meshes.front().second->locate(p))
                throw ConfigError("points", fmt::format("({}, {}) is outside the mesh", p[0], p[1]));

    switch (cfg.experiment) {
        case ExperimentKind::Solve: run_solve(ctx); break;
        case ExperimentKind::Sample: run_sample(ctx); break;
        case ExperimentKind::Covariance: run_covariance(ctx); break;
        case ExperimentKind::Converge: run_converge(ctx); break;
        case ExperimentKind::Truncate: run_truncate(ctx); break;
        case ExperimentKind::Holder: run_holder(ctx); break;
        case ExperimentKind::L2Diag: run_l2diag(ctx); break;
    }

    const std::string hash = cfg.hash_hex();
    const std::string kind = to_string(cfg.experiment);
    Json meta = {{"version", version_string}, {"experiment", kind}, {"config_hash", hash}, {"seed", cfg.seed}};
    Json config_json = Json::object();
    std::istringstream canon(cfg.canonical());
    for (std::string line; std::getline(canon, line);) {
        const auto eq = line.find('=');
        config_json[line.substr(0, eq)] = line.substr(eq + 1);
    }
    meta["config"] = config_json;
    ctx.report["meta"] = {{"version", version_string}, {"experiment", kind}, {"config_hash", hash}, {"seed", cfg.seed}};

    RunResult result;
    result.exit_code = ctx.exit_code;
    result.summary = ctx.summary;
    result.directory = std::filesystem::path(cfg.outdir) / kind / hash;
    std::filesystem::create_directories(result.directory);
    write_text(result.directory / "report.json", ctx.report.dump(2) + "\n");
    write_text(result.directory / "meta.json", meta.dump(2) + "\n");
    std::ostringstream csv;
    ctx.table->write(csv, fmt::format("# whitefem {} experiment={} config_hash={} seed={}", version_string, kind, hash,
                                      cfg.seed));
    write_text(result.directory / "levels.csv", csv.str());
    return result;
}

}  // namespace whitefem
