// Mode dispatch shared by the command-line tool and the Python module.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "perfplast/config.hpp"
#include "perfplast/control.hpp"
#include "perfplast/scenarios.hpp"

namespace perfplast {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitSelfTest = 4 };

struct RunOptions {
    std::filesystem::path config_path;  // empty: defaults only
    std::filesystem::path out_dir = "out";
    std::optional<std::string> mode;  // overrides run.mode
    std::optional<int> seed;          // overrides run.seed
    std::optional<int> threads;       // overrides run.threads
    bool self_test = false;
};

// Builders from a validated config; throw ConfigError on bad values.
Scenario scenario_from_config(const Config& c);
SolverConfig solver_config_from(const Config& c);
// Objective of the optimize mode; targets per optimize.targets, lambda from
// the first entry of optimize.lambdas.
ObjectiveSpec objective_from_config(const Config& c, const Scenario& sc, const Mesh& m, const TimeGrid& grid);

/// Checks mode-specific keys and value ranges without running anything.
void validate_config(const Config& c, const std::string& mode);

/// Runs one mode into `out`, writing artifacts and a manifest.
void run_mode(const Config& c, const std::string& mode, const std::filesystem::path& out);

/// Full entry point: loads the config, applies overrides, runs, and maps
/// failures to exit codes with a one-line JSON error record on stderr.
int run(const RunOptions& opts);

}  // namespace perfplast
