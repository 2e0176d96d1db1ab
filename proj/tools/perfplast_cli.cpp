#include <CLI11.hpp>

#include <iostream>

#include "perfplast/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"perfplast: Yosida-regularized perfect plasticity, simulation and Dirichlet control"};
    perfplast::RunOptions opts;
    std::string mode;
    int seed = 0, threads = 1;
    app.add_option("--config", opts.config_path, "scenario file (sectioned key = value)");
    app.add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    auto* m = app.add_option("--mode", mode, "simulate | optimize | rate-study | oracle-1d | sweep (overrides run.mode)");
    auto* s = app.add_option("--seed", seed, "seed for randomized probes (overrides run.seed)");
    auto* t = app.add_option("--threads", threads, "worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
    app.add_flag("--self-test", opts.self_test, "run the acceptance checks; exit 4 on failure");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : perfplast::kExitConfig;
    }
    if (*m) opts.mode = mode;
    if (*s) opts.seed = seed;
    if (*t) opts.threads = threads;
    return perfplast::run(opts);
}
