// Time stepping for the Yosida-regularized elasto-plastic system
//   -div sigma = ell,  sigma = C (strain(u) - z),  z' = dI_lambda(sigma),
//   u = uD on Gamma_D,
// and for the strain-rate driven flow rule A sigma' + dI_lambda(sigma) = w.
#pragma once

#include <string>
#include <vector>

#include "perfplast/fem.hpp"
#include "perfplast/yield.hpp"

namespace perfplast {

struct TimeGrid {
    double T = 1.0;
    int N = 1;

    TimeGrid() = default;
    TimeGrid(double T, int N);

    double dt() const { return T / N; }
    double t(int k) const { return k * T / N; }
};

enum class Scheme { ExplicitEuler, ImplicitEuler };

struct SolverConfig {
    Scheme scheme = Scheme::ImplicitEuler;
    RegularizationParams rp;
    double newton_tol = 1e-11;
    int newton_maxit = 2000;
    bool smoothed = false;
    // Split explicit steps so that each substep satisfies dt <= lambda gamma_A.
    bool auto_substep = true;
};

struct Material {
    ElasticityTensor elasticity;
    YieldSet yield;
};

struct State {
    FieldP1 u;
    FieldP0 sigma;
    FieldP0 z;
};

struct StepInfo {
    int iterations = 0;
    double increment = 0.0;  // last fixed-point change in sigma (implicit)
    // sum_T |T| <sigma_flow, z_k - z_{k-1}> with sigma_flow the stress at
    // which the flow direction was evaluated.
    double dissipation = 0.0;
    // min over cells of the same pairing, used for the normality check.
    double min_cell_dissipation = 0.0;
};

/// Result of the cell-wise backward-Euler return: sigma + dt C g(sigma) = trial.
struct LocalReturn {
    SymTensor sigma;
    SymTensor dz;  // A (trial - sigma)
};

/// Closed-form return for isotropic C: only the magnitude of the constrained
/// part changes. lambda = 0 is the closest-point projection in the A inner
/// product, which for isotropic A is the Frobenius radial return.
LocalReturn local_return(const Material& mat, const RegularizationParams& rp, bool smoothed, double dt,
                         const SymTensor& trial);

// Flow direction g(sigma) used by the explicit scheme.
SymTensor flow_rate(const Material& mat, const RegularizationParams& rp, bool smoothed, const SymTensor& sigma);

// Largest stable explicit step lambda * gamma_A.
double explicit_step_limit(const Material& mat, int dim, double lambda);

class PlasticitySolver {
public:
    PlasticitySolver(const Mesh& mesh, const Material& mat, const SolverConfig& cfg);

    const Mesh& mesh() const { return eq_.mesh(); }
    const Material& material() const { return mat_; }
    const SolverConfig& config() const { return cfg_; }
    const EquilibriumSolver& equilibrium() const { return eq_; }

    // (u0, sigma0) with z0 = strain(u0) - A sigma0.
    State initial_state(const FieldP1& u0, const FieldP0& sigma0) const;

    State step_explicit(const State& prev, const FieldP1& uD, const LoadVector& ell, double dt,
                        StepInfo* info = nullptr) const;
    State step_implicit(const State& prev, const FieldP1& uD, const LoadVector& ell, double dt,
                        StepInfo* info = nullptr) const;
    State step(const State& prev, const FieldP1& uD, const LoadVector& ell, double dt, StepInfo* info = nullptr) const;

private:
    Material mat_;
    SolverConfig cfg_;
    EquilibriumSolver eq_;
};

struct TrajectoryDiagnostics {
    double sigma_dot_l2 = 0.0;  // sqrt(sum_k dt |(sigma_k - sigma_{k-1}) / dt|^2_{L2})
    double w1p_sup = 0.0;       // max_k recovered W^{1,p} norm of sigma_k
    double w1p_exponent = 4.0;
    double max_trace_z = 0.0;
    double min_dissipation = 0.0;  // min over steps and cells
    double max_stress_excess = 0.0;  // max over steps/cells of |sigma_K| / sigma_y - 1
    std::vector<double> energy;      // 1/2 int A sigma : sigma at every node
    std::vector<double> dissipation;  // per step, index 0 unused
    std::vector<double> sigma_dot_sq;  // |(sigma_k - sigma_{k-1}) / dt|^2_{L2}, index 0 unused
    int total_substeps = 0;
    int max_iterations = 0;
    std::vector<std::string> warnings;
};

struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;
    TrajectoryDiagnostics diag;
};

/// Runs the coupled scheme over the grid. uD_path and ell_path hold the
/// controls at every time node; explicit substeps interpolate them linearly.
/// Requires ell(0) = 0 and uD(0) = u0 on the Dirichlet nodes.
Trajectory run_trajectory(const PlasticitySolver& solver, const TimeGrid& grid, const std::vector<FieldP1>& uD_path,
                          const std::vector<LoadVector>& ell_path, const State& init);

/// Strain-rate driven flow rule A sigma' + dI_lambda(sigma) = w per cell.
/// lambda = 0 requires the implicit scheme and gives the projected evolution.
std::vector<FieldP0> evolve_flow_rule(const Material& mat, const std::vector<FieldP0>& w_path,
                                      const RegularizationParams& rp, const TimeGrid& grid, const FieldP0& sigma0,
                                      Scheme scheme = Scheme::ImplicitEuler, bool smoothed = false);

// sqrt(sum_k trapz |uD_k|^2_{H1} + sum_k dt |(uD_k - uD_{k-1}) / dt|^2_{H1}).
double h1h1_norm(const Mesh& m, const std::vector<FieldP1>& path, const TimeGrid& grid);

// max_k |a_k - b_k|_{L2} and sqrt(sum_k dt |a_k - b_k|^2_{L2}) over k = 0..N.
double max_l2_gap(const Mesh& m, const std::vector<FieldP0>& a, const std::vector<FieldP0>& b);
double l2l2_gap(const Mesh& m, const std::vector<FieldP0>& a, const std::vector<FieldP0>& b, double dt);

std::vector<FieldP0> stress_history(const Trajectory& tr);

}  // namespace perfplast
