#pragma once

#include "whitefem/fem.hpp"
#include "whitefem/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace whitefem {

inline constexpr const char* version_string = "0.1.0";

enum class ExperimentKind { Solve, Sample, Covariance, Converge, Truncate, Holder, L2Diag };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

/// Flat `key = value` experiment description. Keys:
///
///   experiment    solve | sample | covariance | converge | truncate | holder | l2diag
///   domain        rectangle | interval | mesh           (rectangle)
///   lx, ly        rectangle sides                       (π, π)
///   a, b          interval ends                         (0, 1)
///   mesh_file     mesh path when domain = mesh
///   bc            dirichlet | neumann | robin           (neumann)
///   beta          Robin coefficient, required for robin
///   lambda        reaction coefficient > 0              (1)
///   r             Sobolev index > d/2 - 1               (d/2 - 1 + 0.1)
///   levels        cells per axis, comma separated       (8,16,32,64)
///   seed          RNG seed                              (0)
///   samples       Monte Carlo draws                     (1000)
///   truncations   truncation indices m                  (10,40,160)
///   modes         spectral basis size / box size        (4096)
///   points        evaluation points "x y; x y"          (domain center)
///   holder_pairs  number of point pairs                 (6)
///   holder_min, holder_max  separation range            (0.3, 3.0)
///   check_rate_min, check_rate_max  acceptance window for converge
///   outdir        output root                           (results)
///   workers       worker threads, 0 = all               (0)
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Solve;
    std::string domain = "rectangle";
    double lx = 0.0;
    double ly = 0.0;
    double a = 0.0;
    double b = 1.0;
    std::string mesh_file;
    BoundaryKind bc = BoundaryKind::Neumann;
    std::optional<double> beta;
    double lambda = 1.0;
    std::optional<double> r;
    std::vector<int> levels{8, 16, 32, 64};
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    std::vector<std::size_t> truncations{10, 40, 160};
    std::size_t modes = 4096;
    std::vector<Point> points;
    std::size_t holder_pairs = 6;
    double holder_min = 0.3;
    double holder_max = 3.0;
    std::optional<double> check_rate_min;
    std::optional<double> check_rate_max;
    std::string outdir = "results";
    int workers = 0;

    /// Keys that were set explicitly, in canonical text form.
    std::map<std::string, std::string> explicit_keys;

    static ExperimentConfig parse(std::istream& in, const std::string& source = "<config>");
    static ExperimentConfig from_file(const std::string& path);

    /// Applies one `key = value` assignment; throws ConfigError naming the key.
    void set(const std::string& key, const std::string& value);

    /// Throws ConfigError naming the offending field.
    void validate() const;

    int dim() const;
    double effective_r() const;
    BoundaryCondition boundary_condition() const;

    /// Sorted key=value lines of every result-affecting setting (the seed
    /// included, outdir and workers excluded).
    std::string canonical() const;
    /// 64-bit FNV-1a of canonical().
    std::uint64_t hash() const;
    std::string hash_hex() const;
};

struct RunResult {
    /// 0 success, 4 acceptance window violated.
    int exit_code = 0;
    std::filesystem::path directory;
    std::string summary;
};

/// Runs the experiment and writes report.json, levels.csv and meta.json to
/// <outdir>/<experiment>/<config hash>/. Throws ConfigError or NumericalError.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace whitefem
