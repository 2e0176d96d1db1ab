// Regularized Dirichlet/load control of the elasto-plastic system.
//
// Controls are the Dirichlet data uD (full-mesh nodal values at every time
// node, piecewise linear in time) and an auxiliary load ell. The objective is
//
//   J = sum_k dt [ ws |strain(u'_k) - mu_k|_{L1,eps}^2 + wv |u'_k - v_k|_{L1,eps}^2 ]
//       + alpha / 2 Tik(uD) + lambda^-theta |ell|^2_{L2(H^-1)} + wl |ell'|^2_{L2(H^-1)}
//
// with backward difference rates u'_k, Huber-smoothed L1 norms and the
// discrete dual norm |ell|^2_{H^-1} = ell^T K^-1 ell. The forward model is the
// explicit scheme with the smoothed Yosida derivative, which makes J
// differentiable; its gradient is computed by a discrete adjoint sweep.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "perfplast/plasticity.hpp"

namespace perfplast {

struct ControlParam {
    std::vector<FieldP1> uD;
    std::vector<LoadVector> ell;

    // uD = uD_fn(t) at every node, ell = 0.
    static ControlParam from_dirichlet(const Mesh& m, const TimeGrid& grid,
                                       const std::function<FieldP1(double)>& uD_fn);
};

struct ObjectiveSpec {
    std::vector<FieldP0> mu_target;  // desired strain rate, N + 1 entries (entry 0 unused)
    std::vector<FieldP1> v_target;   // desired velocity, N + 1 entries (entry 0 unused)
    double strain_weight = 1.0;
    double velocity_weight = 1.0;
    double alpha = 1e-3;
    double theta = 0.5;
    double load_rate_weight = 1.0;
    double huber_eps_obj = 1e-3;
    RegularizationParams rp{1e-2, 1e-2};
    double R_monitor = 1e3;

    void validate(const Mesh& m, const TimeGrid& grid) const;
};

// Huber function: r^2 / (2 eps) below eps, r - eps / 2 above.
double huber(double r, double eps);
double huber_slope(double r, double eps);

struct ObjectiveTerms {
    double strain_tracking = 0.0;
    double velocity_tracking = 0.0;
    double tikhonov = 0.0;   // alpha / 2 Tik(uD)
    double load = 0.0;       // lambda^-theta |ell|^2
    double load_rate = 0.0;  // wl |ell'|^2
    double total() const { return strain_tracking + velocity_tracking + tikhonov + load + load_rate; }
};

struct ObjectiveEvaluation {
    double J = 0.0;
    ObjectiveTerms terms;
    std::vector<State> states;  // coarse time nodes 0..N
    double sigma_dot_l2 = 0.0;
    double w1p_sup = 0.0;
    double r_monitor = 0.0;  // sigma_dot_l2 + w1p_sup
    double max_trace_z = 0.0;
    double load_norm = 0.0;  // |ell|_{L2(H^-1)}
    int substeps = 1;
};

/// Fixed mesh, material, time grid, initial state and objective. All methods
/// are const; a single instance may serve concurrent evaluations.
class ControlProblem {
public:
    ControlProblem(const Mesh& mesh, const Material& mat, const TimeGrid& grid, const State& init,
                   const ObjectiveSpec& spec);

    const Mesh& mesh() const { return eq_.mesh(); }
    const TimeGrid& grid() const { return grid_; }
    const ObjectiveSpec& spec() const { return spec_; }
    const Material& material() const { return mat_; }
    const State& initial_state() const { return init_; }
    const EquilibriumSolver& equilibrium() const { return eq_; }
    int substeps() const { return substeps_; }

    double load_penalty_coefficient() const;

    // Tik(uD) = sum_k w_k |uD_k|^2_X + sum_k dt |(uD_k - uD_{k-1}) / dt|^2_{H1}
    // with |.|^2_X = |.|^2_{H1} + |recovered Hessian|^2_{L2}.
    double tikhonov(const std::vector<FieldP1>& uD) const;
    std::vector<FieldP1> tikhonov_gradient(const std::vector<FieldP1>& uD) const;
    double load_norm_sq(const std::vector<LoadVector>& ell) const;

    ObjectiveEvaluation evaluate(const ControlParam& cp) const;
    // Gradient with respect to every coefficient of cp; eliminated
    // coefficients (uD(0) on Gamma_D, ell(0), ell on Dirichlet dofs) are zero.
    double gradient(const ControlParam& cp, ControlParam& grad) const;

    // Free coefficients as a flat vector and back. Eliminated entries are
    // taken from `base`.
    int num_free() const;
    Eigen::VectorXd pack(const ControlParam& cp) const;
    ControlParam unpack(const Eigen::VectorXd& x, const ControlParam& base) const;

    // Inverse Hessian of the Tikhonov and load terms applied to a packed
    // vector; exact for zero tracking weights.
    Eigen::VectorXd apply_quadratic_inverse(const Eigen::VectorXd& g) const;

    // Enforces uD(0) = u0 on Gamma_D, ell(0) = 0 and ell = 0 on Dirichlet dofs.
    void check_feasible(const ControlParam& cp) const;

private:
    struct Forward;
    Forward run_forward(const ControlParam& cp, bool keep_fine) const;

    Material mat_;
    TimeGrid grid_;
    State init_;
    ObjectiveSpec spec_;
    EquilibriumSolver eq_;
    SparseMatrix gram_h1_;
    SparseMatrix gram_x_;
    std::vector<double> lumped_;
    int substeps_ = 1;
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> tik_factor_;
    Eigen::MatrixXd load_time_inverse_;  // N x N, load part of the Hessian is 2 T (x) K_ff^-1
};

struct OptimizerOptions {
    int max_iterations = 200;
    int max_evaluations = 1000;
    double gradient_tol = 1e-8;
    int memory = 10;
    double armijo = 1e-4;
    int max_backtracks = 40;
    // Initial inverse Hessian; a scaled identity when empty.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> inverse_hessian_guess;
};

struct OptIteration {
    int iteration = 0;
    double J = 0.0;
    double grad_norm = 0.0;
    int line_search_steps = 0;
    double step = 0.0;
};

struct OptReport {
    std::vector<OptIteration> iterations;
    ControlParam controls;
    double J = 0.0;
    double grad_norm = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::string status;
};

// Limited-memory BFGS on a generic smooth function with Armijo backtracking.
using SmoothFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    double grad_norm = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::string status;
    std::vector<OptIteration> iterations;
};
LbfgsResult minimize_lbfgs(const SmoothFunction& f, Eigen::VectorXd x0, const OptimizerOptions& opts);

OptReport optimize(const ControlProblem& problem, const ControlParam& cp0, const OptimizerOptions& opts);

struct ContinuationStep {
    double lambda = 0.0;
    OptReport report;
    ObjectiveTerms terms;
    double J = 0.0;
    double load_norm = 0.0;
    double sigma_dot_l2 = 0.0;
    double r_monitor = 0.0;
    double control_drift = 0.0;  // |x_lambda - x_previous| / max(1, |x_previous|)
    bool ok = true;
    std::string error;
};

/// Solves the regularized problem for each lambda in a strictly decreasing
/// sequence, warm-starting every solve from the previous solution.
std::vector<ContinuationStep> lambda_continuation(const Mesh& mesh, const Material& mat, const TimeGrid& grid,
                                                  const State& init, const ObjectiveSpec& base,
                                                  const std::vector<double>& lambdas, const ControlParam& cp0,
                                                  const OptimizerOptions& opts);

}  // namespace perfplast
