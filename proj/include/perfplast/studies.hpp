// Verification studies. Each check_* function runs one numbered acceptance
// criterion with its tolerances fixed in code and reports a single verdict.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "perfplast/control.hpp"
#include "perfplast/scenarios.hpp"

namespace perfplast {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::string format_check(const CheckResult& r);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RateStudyOptions {
    std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    int N = 2000;
    int cells = 4;
    double w = 2.0;  // constant strain rate driving the bar
    Scheme scheme = Scheme::ImplicitEuler;
};

struct RateStudyRow {
    double lambda = 0.0;
    double gap = 0.0;    // max_k |sigma_lambda - sigma|_{L2}
    double bound = 0.0;  // sqrt(lambda |C|^2 / gamma_C |w - A sigma'|^2_{L2(L2)})
};

struct RateStudyResult {
    std::vector<RateStudyRow> rows;
    double order = 0.0;  // fitted exponent of the gap in sqrt(lambda)
    double norm_C = 0.0;
    double gamma_C = 0.0;
    double residual_sq = 0.0;  // |w - A sigma'|^2_{L2(L2)} of the lambda = 0 solution
};

/// Flow rule A sigma' + dI_lambda(sigma) = w on the 1D bar for every lambda,
/// compared with the lambda = 0 evolution on the same grid.
RateStudyResult rate_study(const RateStudyOptions& opts);

CheckResult check_oned_benchmark();
CheckResult check_yosida_rate();
CheckResult check_apriori_bound();
CheckResult check_gradient(std::uint64_t seed);
CheckResult check_operator_properties(std::uint64_t seed);
CheckResult check_patch_test(std::uint64_t seed);
CheckResult check_scheme_consistency();
CheckResult check_continuation();
CheckResult check_incompressibility();
CheckResult check_oracle();

// All ten checks in order. `only` selects a subset by id when non-empty.
std::vector<CheckResult> run_acceptance(std::uint64_t seed, const std::vector<int>& only = {});

// Pieces reused by the CLI and the tests.
struct GradientProbe {
    double fd = 0.0;
    double adjoint = 0.0;
    double rel_error = 0.0;
};
std::vector<GradientProbe> probe_gradient(const ControlProblem& problem, const ControlParam& cp, int directions,
                                          std::uint64_t seed, double rel_step = 1e-6);

// Targets (strain rate, velocity) recorded from a forward trajectory.
void targets_from_states(const Mesh& m, const std::vector<State>& states, double dt, ObjectiveSpec& spec);

}  // namespace perfplast
