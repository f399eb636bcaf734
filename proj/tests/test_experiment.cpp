#include "whitefem/error.hpp"
#include "whitefem/experiment.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace whitefem;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("whitefem_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return ExperimentConfig::parse(in);
}

std::string error_field(const std::string& text) {
    try {
        parse(text).validate();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(WHITEFEM_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse(
        "# comment line\n"
        "experiment = sample   # trailing comment\n"
        "bc = robin\n"
        "beta = 0.5\n"
        "lambda=2\n"
        "levels = 4, 8\n"
        "points = 0.5 0.5; 1, 2\n"
        "\n");
    CHECK(cfg.experiment == ExperimentKind::Sample);
    CHECK(cfg.bc == BoundaryKind::Robin);
    CHECK(*cfg.beta == 0.5);
    CHECK(cfg.lambda == 2.0);
    CHECK(cfg.levels == std::vector<int>{4, 8});
    REQUIRE(cfg.points.size() == 2);
    CHECK(cfg.points[1] == Point{1.0, 2.0});
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.effective_r() == doctest::Approx(0.1));

    CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse("lambda = 1\nlambda = 2\n"), ConfigError);
    try {
        parse("colour = blue\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "colour");
    }
    try {
        parse("lambda = one\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "lambda");
    }
}

TEST_CASE("config validation names the field") {
    CHECK(error_field("bc = robin\n") == "beta");
    CHECK(error_field("bc = robin\nbeta = -1\n") == "beta");
    CHECK(error_field("lambda = 0\n") == "lambda");
    CHECK(error_field("r = -0.5\n") == "r");
    CHECK(error_field("domain = interval\nr = -0.6\n") == "r");
    CHECK(error_field("domain = interval\nr = -0.4\n") == "");
    CHECK(error_field("levels = 0\n") == "levels");
    CHECK(error_field("experiment = truncate\nmodes = 10\ntruncations = 20\n") == "truncations");
    CHECK(error_field("points = 5 5\n") == "points");
    CHECK(error_field("domain = mesh\n") == "mesh_file");
    CHECK(error_field("experiment = holder\nholder_pairs = 2\n") == "holder_pairs");
    CHECK(error_field("bc = neumann\n") == "");
}

TEST_CASE("config hash") {
    auto a = parse("experiment = solve\nseed = 3\n");
    auto b = parse("seed = 3\nexperiment = solve\nworkers = 4\noutdir = elsewhere\n");
    CHECK(a.hash() == b.hash());
    auto c = parse("experiment = solve\nseed = 4\n");
    CHECK(a.hash() != c.hash());
    CHECK(a.hash_hex().size() == 16);
    CHECK(a.canonical().find("workers") == std::string::npos);
    CHECK(a.canonical().find("seed=3") != std::string::npos);
}

TEST_CASE("converge experiment writes the report") {
    const fs::path dir = scratch_dir("converge");
    auto cfg = parse("experiment = converge\nbc = neumann\nlambda = 1\nr = 1.1\nlevels = 4, 8, 16\n");
    cfg.set("outdir", dir.string());
    const RunResult res = run_experiment(cfg);
    CHECK(res.exit_code == 0);
    CHECK(res.directory == dir / "converge" / cfg.hash_hex());
    const auto report = nlohmann::json::parse(slurp(res.directory / "report.json"));
    CHECK(report["fitted_rate"].is_number());
    CHECK(report["levels"].size() == 3);
    CHECK(report["meta"]["config_hash"] == cfg.hash_hex());
    const auto meta = nlohmann::json::parse(slurp(res.directory / "meta.json"));
    CHECK(meta["seed"] == 0);
    CHECK(meta["version"] == version_string);
    const std::string csv = slurp(res.directory / "levels.csv");
    CHECK(csv.rfind("# whitefem ", 0) == 0);
    CHECK(csv.find("config_hash=" + cfg.hash_hex()) != std::string::npos);

    auto strict = cfg;
    strict.set("check_rate_min", "5.0");
    CHECK(run_experiment(strict).exit_code == 4);
}

TEST_CASE("reruns are byte identical across worker counts") {
    const fs::path d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    for (const std::string kind : {"sample", "truncate", "holder", "covariance", "solve", "l2diag"}) {
        auto cfg = parse("experiment = " + kind +
                         "\nbc = robin\nbeta = 1\nlevels = 8, 16\nsamples = 200\nmodes = 600\nseed = 5\n"
                         "points = 1 1; 2 0.5\n");
        cfg.set("outdir", d1.string());
        cfg.set("workers", "1");
        const RunResult a = run_experiment(cfg);
        cfg.set("outdir", d2.string());
        cfg.set("workers", "4");
        const RunResult b = run_experiment(cfg);
        for (const char* f : {"report.json", "levels.csv", "meta.json"}) {
            INFO(kind << "/" << f);
            CHECK(slurp(a.directory / f) == slurp(b.directory / f));
        }
    }
}

TEST_CASE("imported meshes") {
    const fs::path dir = scratch_dir("meshfile");
    // L-shaped domain from three unit squares
    std::ofstream(dir / "l.mesh") << "2 8 6 8\n"
                                     "0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n0 2\n1 2\n"
                                     "0 1 4\n0 4 3\n1 2 5\n1 5 4\n3 4 7\n3 7 6\n"
                                     "0 1 0\n1 2 0\n2 5 1\n5 4 2\n4 7 1\n7 6 2\n6 3 3\n3 0 3\n";
    auto cfg = parse("experiment = sample\ndomain = mesh\nsamples = 50\nbc = neumann\n");
    cfg.set("mesh_file", (dir / "l.mesh").string());
    cfg.set("outdir", dir.string());
    CHECK(run_experiment(cfg).exit_code == 0);
    cfg.set("experiment", "converge");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch_dir("cli");
    std::ofstream(dir / "ok.cfg") << "bc = neumann\nlevels = 4\n";
    std::ofstream(dir / "robin.cfg") << "bc = robin\nlevels = 4\n";
    std::ofstream(dir / "rate.cfg") << "levels = 4, 8, 16\nr = 1.1\ncheck_rate_min = 9\n";
    const std::string out = " --outdir " + (dir / "out").string();
    CHECK(run_cli("solve --config " + (dir / "ok.cfg").string() + out) == 0);
    CHECK(run_cli("solve --config " + (dir / "robin.cfg").string() + out) == 2);
    CHECK(run_cli("solve --config " + (dir / "missing.cfg").string() + out) == 2);
    CHECK(run_cli("bogus --config " + (dir / "ok.cfg").string() + out) == 2);
    CHECK(run_cli("converge --config " + (dir / "rate.cfg").string() + out) == 4);
    CHECK(run_cli("solve --config " + (dir / "ok.cfg").string() + " --seed 9 --workers 2" + out) == 0);
    CHECK(fs::exists(dir / "out" / "solve"));
}
