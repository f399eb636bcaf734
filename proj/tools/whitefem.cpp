#include "whitefem/error.hpp"
#include "whitefem/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Finite element experiments for -Δu + λu = white noise"};
    app.set_version_flag("--version", whitefem::version_string);
    std::string experiment, config_path, outdir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::vector<std::string> overrides;
    app.add_option("experiment", experiment, "solve | sample | covariance | converge | truncate | holder | l2diag")
        ->required();
    app.add_option("--config", config_path, "key = value configuration file")->required();
    app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--workers", workers, "worker threads, 0 = all cores (overrides the config)");
    app.add_option("--outdir", outdir, "output root (overrides the config)");
    app.add_option("--set", overrides, "extra key=value assignments applied after the file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto cfg = whitefem::ExperimentConfig::from_file(config_path);
        const auto kind = whitefem::parse_experiment_kind(experiment);
        if (!kind) throw whitefem::ConfigError("experiment", fmt::format("unknown experiment '{}'", experiment));
        if (cfg.explicit_keys.count("experiment") && cfg.experiment != *kind)
            throw whitefem::ConfigError("experiment", fmt::format("config file says '{}', command line says '{}'",
                                                                  whitefem::to_string(cfg.experiment), experiment));
        cfg.experiment = *kind;
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw whitefem::ConfigError("--set", fmt::format("expected key=value, got '{}'", kv));
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) cfg.set("seed", std::to_string(*seed));
        if (workers) cfg.set("workers", std::to_string(*workers));
        if (!outdir.empty()) cfg.set("outdir", outdir);

        const auto result = whitefem::run_experiment(cfg);
        fmt::print("{}: {}\n{}\n", experiment, result.summary, result.directory.string());
        return result.exit_code;
    } catch (const whitefem::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return 2;
    } catch (const whitefem::NumericalError& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
