#include "perfplast/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace perfplast {

namespace {

// Modulus of C on the subspace the yield condition acts on.
double constrained_modulus(const Material& mat, int dim) {
    if (mat.yield.kind == YieldKind::Uniaxial) return mat.elasticity.norm_C(dim);
    return 2.0 * mat.elasticity.lame_mu;
}

// Root of r + c m(r) = r_trial on [sigma_y - eps, r_trial]; the left side is
// increasing, so Newton with a bisection fallback is safe.
double smoothed_return_radius(double r_trial, double c, double sigma_y, double lambda, double eps) {
    double lo = std::max(0.0, sigma_y - eps);
    double hi = r_trial;
    double r = std::clamp(sigma_y + (r_trial - sigma_y) / (1.0 + c / lambda), lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double f = r + c * smoothed_magnitude(r, sigma_y, lambda, eps) - r_trial;
        if (f > 0.0) hi = r;
        else lo = r;
        if (std::abs(f) <= 1e-15 * std::max(1.0, r_trial)) break;
        const double df = 1.0 + c * smoothed_magnitude_slope(r, sigma_y, lambda, eps);
        double next = r - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == r) break;
        r = next;
    }
    return r;
}

}  // namespace

TimeGrid::TimeGrid(double T_, int N_) : T(T_), N(N_) {
    if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be positive");
    if (N < 1) throw std::invalid_argument("TimeGrid: N must be at least 1");
}

LocalReturn local_return(const Material& mat, const RegularizationParams& rp, bool smoothed, double dt,
                         const SymTensor& trial) {
    const YieldSet& ys = mat.yield;
    const SymTensor part = ys.constrained_part(trial);
    const SymTensor rest = trial - part;
    const double r_trial = frob_norm(part);
    const double modulus = constrained_modulus(mat, trial.dim());

    double r = r_trial;
    if (smoothed) {
        if (!(rp.lambda > 0.0)) throw std::invalid_argument("local_return: smoothing requires lambda > 0");
        if (r_trial > ys.sigma_y - rp.huber_eps) {
            r = smoothed_return_radius(r_trial, modulus * dt, ys.sigma_y, rp.lambda, rp.huber_eps);
        }
    } else if (r_trial > ys.sigma_y) {
        if (rp.lambda > 0.0) {
            const double kappa = modulus * dt / rp.lambda;
            r = (r_trial + kappa * ys.sigma_y) / (1.0 + kappa);
        } else {
            r = ys.sigma_y;
        }
    }
    if (r == r_trial) return {trial, SymTensor::zero(trial.dim())};
    const SymTensor dir = part * (1.0 / r_trial);
    return {rest + dir * r, dir * ((r_trial - r) / modulus)};
}

SymTensor flow_rate(const Material& mat, const RegularizationParams& rp, bool smoothed, const SymTensor& sigma) {
    return smoothed ? yosida_deriv_smoothed(mat.yield, rp, sigma) : yosida_deriv(mat.yield, rp, sigma);
}

double explicit_step_limit(const Material& mat, int dim, double lambda) {
    return lambda * mat.elasticity.coercivity_A(dim);
}

PlasticitySolver::PlasticitySolver(const Mesh& mesh, const Material& mat, const SolverConfig& cfg)
    : mat_(mat), cfg_(cfg), eq_(mesh, mat.elasticity) {
    if (cfg.scheme == Scheme::ExplicitEuler && !(cfg.rp.lambda > 0.0)) {
        throw std::invalid_argument("explicit Euler requires lambda > 0");
    }
    if (cfg.smoothed && !(cfg.rp.lambda > 0.0)) {
        throw std::invalid_argument("the smoothed flow rule requires lambda > 0");
    }
    if (mat.yield.kind == YieldKind::Uniaxial && mesh.dim() != 1) {
        throw std::invalid_argument("the uniaxial yield set is only available on interval meshes");
    }
}

State PlasticitySolver::initial_state(const FieldP1& u0, const FieldP0& sigma0) const {
    State s;
    s.u = u0;
    s.sigma = sigma0;
    s.z = strain(mesh(), u0);
    for (std::size_t c = 0; c < s.z.size(); ++c) s.z[c] -= apply_A(mat_.elasticity, sigma0[c]);
    return s;
}

State PlasticitySolver::step_explicit(const State& prev, const FieldP1& uD, const LoadVector& ell, double dt,
                                      StepInfo* info) const {
    const Mesh& m = mesh();
    State next;
    next.z = prev.z;
    double diss = 0.0;
    double min_cell = std::numeric_limits<double>::infinity();
    for (int c = 0; c < m.num_cells(); ++c) {
        const SymTensor dz = flow_rate(mat_, cfg_.rp, cfg_.smoothed, prev.sigma[c]) * dt;
        next.z[c] += dz;
        const double p = frob_inner(prev.sigma[c], dz);
        diss += m.cell_volume(c) * p;
        min_cell = std::min(min_cell, p);
    }
    auto sol = eq_.solve(next.z, uD, ell);
    next.u = std::move(sol.u);
    next.sigma = std::move(sol.sigma);
    if (info) {
        info->iterations = 1;
        info->increment = 0.0;
        info->dissipation = diss;
        info->min_cell_dissipation = min_cell;
    }
    return next;
}

State PlasticitySolver::step_implicit(const State& prev, const FieldP1& uD, const LoadVector& ell, double dt,
                                      StepInfo* info) const {
    const Mesh& m = mesh();
    const int nc = m.num_cells();
    State cur;
    cur.z = prev.z;
    cur.sigma = prev.sigma;
    double change = std::numeric_limits<double>::infinity();
    int it = 0;
    FieldP0 dz(nc);
    while (it < cfg_.newton_maxit) {
        ++it;
        cur.u = eq_.solve_displacement(cur.z, uD, ell);
        const FieldP0 eps = strain(m, cur.u);
        double diff_sq = 0.0;
        for (int c = 0; c < nc; ++c) {
            const SymTensor trial = apply_C(mat_.elasticity, eps[c] - prev.z[c]);
            const LocalReturn lr = local_return(mat_, cfg_.rp, cfg_.smoothed, dt, trial);
            const SymTensor d = lr.sigma - cur.sigma[c];
            diff_sq += m.cell_volume(c) * frob_inner(d, d);
            cur.sigma[c] = lr.sigma;
            dz[c] = lr.dz;
            cur.z[c] = prev.z[c] + lr.dz;
        }
        change = std::sqrt(diff_sq);
        if (change <= cfg_.newton_tol) break;
    }
    if (change > cfg_.newton_tol) {
        std::ostringstream os;
        os << "implicit step did not converge in " << cfg_.newton_maxit << " iterations, last increment " << change;
        throw SolverError(os.str());
    }
    // Final stress from the converged displacement and plastic strain.
    cur.sigma = eq_.stress(cur.u, cur.z);
    if (info) {
        info->iterations = it;
        info->increment = change;
        double diss = 0.0;
        double min_cell = std::numeric_limits<double>::infinity();
        for (int c = 0; c < nc; ++c) {
            const double p = frob_inner(cur.sigma[c], dz[c]);
            diss += m.cell_volume(c) * p;
            min_cell = std::min(min_cell, p);
        }
        info->dissipation = diss;
        info->min_cell_dissipation = min_cell;
    }
    return cur;
}

State PlasticitySolver::step(const State& prev, const FieldP1& uD, const LoadVector& ell, double dt,
                             StepInfo* info) const {
    return cfg_.scheme == Scheme::ExplicitEuler ? step_explicit(prev, uD, ell, dt, info)
                                                : step_implicit(prev, uD, ell, dt, info);
}

Trajectory run_trajectory(const PlasticitySolver& solver, const TimeGrid& grid, const std::vector<FieldP1>& uD_path,
                          const std::vector<LoadVector>& ell_path, const State& init) {
    const Mesh& m = solver.mesh();
    const int N = grid.N;
    if (static_cast<int>(uD_path.size()) != N + 1 || static_cast<int>(ell_path.size()) != N + 1) {
        throw std::invalid_argument("run_trajectory: control paths must have N + 1 entries");
    }
    const EquilibriumSolver& eq = solver.equilibrium();
    for (int d : eq.free_dofs()) {
        if (ell_path[0][d] != 0.0) throw std::invalid_argument("run_trajectory: ell(0) must vanish");
    }
    for (int d : eq.constrained_dofs()) {
        if (std::abs(uD_path[0][d] - init.u[d]) > 1e-12 * std::max(1.0, std::abs(init.u[d]))) {
            throw std::invalid_argument("run_trajectory: uD(0) must equal u0 on the Dirichlet boundary");
        }
    }

    Trajectory tr;
    tr.grid = grid;
    tr.states.reserve(N + 1);
    tr.states.push_back(init);
    auto& dg = tr.diag;
    dg.energy.assign(N + 1, 0.0);
    dg.dissipation.assign(N + 1, 0.0);
    dg.sigma_dot_sq.assign(N + 1, 0.0);
    dg.min_dissipation = 0.0;

    const SolverConfig& cfg = solver.config();
    const Material& mat = solver.material();
    const double dt = grid.dt();
    int substeps = 1;
    if (cfg.scheme == Scheme::ExplicitEuler) {
        const double limit = explicit_step_limit(mat, m.dim(), cfg.rp.lambda);
        if (dt > limit * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "explicit step " << dt << " exceeds the stability limit " << limit;
            if (cfg.auto_substep) {
                substeps = static_cast<int>(std::ceil(dt / limit - 1e-9));
                os << "; using " << substeps << " substeps";
            }
            dg.warnings.push_back(os.str());
        }
    }

    auto record = [&](int k, const State& s) {
        double e = 0.0;
        for (int c = 0; c < m.num_cells(); ++c) {
            e += 0.5 * m.cell_volume(c) * frob_inner(apply_A(mat.elasticity, s.sigma[c]), s.sigma[c]);
            const double ex = frob_norm(mat.yield.constrained_part(s.sigma[c])) / mat.yield.sigma_y - 1.0;
            dg.max_stress_excess = std::max(dg.max_stress_excess, ex);
        }
        dg.energy[k] = e;
        dg.max_trace_z = std::max(dg.max_trace_z, mat.yield.kind == YieldKind::VonMises ? max_abs_trace(s.z) : 0.0);
        dg.w1p_sup = std::max(dg.w1p_sup, recovered_w1p_norm(m, s.sigma, dg.w1p_exponent));
    };
    dg.max_stress_excess = -std::numeric_limits<double>::infinity();
    record(0, init);

    double sdot = 0.0;
    double min_diss = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= N; ++k) {
        State cur = tr.states.back();
        double diss = 0.0;
        const double h = dt / substeps;
        for (int s = 1; s <= substeps; ++s) {
            const double w = static_cast<double>(s) / substeps;
            const FieldP1 uD = (1.0 - w) * uD_path[k - 1] + w * uD_path[k];
            const LoadVector ell = (1.0 - w) * ell_path[k - 1] + w * ell_path[k];
            StepInfo info;
            cur = solver.step(cur, uD, ell, h, &info);
            diss += info.dissipation;
            min_diss = std::min(min_diss, info.min_cell_dissipation);
            dg.max_iterations = std::max(dg.max_iterations, info.iterations);
            ++dg.total_substeps;
        }
        FieldP0 diff(cur.sigma.size());
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = (cur.sigma[c] - tr.states.back().sigma[c]) * (1.0 / dt);
        dg.sigma_dot_sq[k] = l2_norm_sq(m, diff);
        sdot += dt * dg.sigma_dot_sq[k];
        dg.dissipation[k] = diss;
        tr.states.push_back(std::move(cur));
        record(k, tr.states.back());
    }
    dg.sigma_dot_l2 = std::sqrt(sdot);
    dg.min_dissipation = N > 0 ? min_diss : 0.0;
    return tr;
}

std::vector<FieldP0> evolve_flow_rule(const Material& mat, const std::vector<FieldP0>& w_path,
                                      const RegularizationParams& rp, const TimeGrid& grid, const FieldP0& sigma0,
                                      Scheme scheme, bool smoothed) {
    const int N = grid.N;
    if (static_cast<int>(w_path.size()) != N + 1) throw std::invalid_argument("evolve_flow_rule: w needs N + 1 entries");
    if (scheme == Scheme::ExplicitEuler && !(rp.lambda > 0.0)) {
        throw std::invalid_argument("evolve_flow_rule: explicit Euler requires lambda > 0");
    }
    const std::size_t nc = sigma0.size();
    const double dt = grid.dt();
    std::vector<FieldP0> out;
    out.reserve(N + 1);
    out.push_back(sigma0);

    int substeps = 1;
    if (scheme == Scheme::ExplicitEuler && nc > 0) {
        const double limit = explicit_step_limit(mat, sigma0[0].dim(), rp.lambda);
        if (dt > limit) substeps = static_cast<int>(std::ceil(dt / limit - 1e-9));
    }
    for (int k = 1; k <= N; ++k) {
        FieldP0 cur = out.back();
        for (std::size_t c = 0; c < nc; ++c) {
            if (scheme == Scheme::ExplicitEuler) {
                const double h = dt / substeps;
                for (int s = 0; s < substeps; ++s) {
                    const double w = static_cast<double>(s) / substeps;
                    const SymTensor rate = w_path[k - 1][c] * (1.0 - w) + w_path[k][c] * w;
                    cur[c] += apply_C(mat.elasticity, rate - flow_rate(mat, rp, smoothed, cur[c])) * h;
                }
            } else {
                const SymTensor trial = cur[c] + apply_C(mat.elasticity, w_path[k][c]) * dt;
                cur[c] = local_return(mat, rp, smoothed, dt, trial).sigma;
            }
        }
        out.push_back(std::move(cur));
    }
    return out;
}

double h1h1_norm(const Mesh& m, const std::vector<FieldP1>& path, const TimeGrid& grid) {
    const SparseMatrix G = h1_gram(m);
    const double dt = grid.dt();
    double acc = 0.0;
    for (int k = 0; k <= grid.N; ++k) {
        const double w = (k == 0 || k == grid.N) ? 0.5 * dt : dt;
        acc += w * path[k].dot(G * path[k]);
        if (k > 0) {
            const Eigen::VectorXd r = (path[k] - path[k - 1]) / dt;
            acc += dt * r.dot(G * r);
        }
    }
    return std::sqrt(acc);
}

double max_l2_gap(const Mesh& m, const std::vector<FieldP0>& a, const std::vector<FieldP0>& b) {
    double mx = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        FieldP0 d(a[k].size());
        for (std::size_t c = 0; c < d.size(); ++c) d[c] = a[k][c] - b[k][c];
        mx = std::max(mx, std::sqrt(l2_norm_sq(m, d)));
    }
    return mx;
}

double l2l2_gap(const Mesh& m, const std::vector<FieldP0>& a, const std::vector<FieldP0>& b, double dt) {
    double acc = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        FieldP0 d(a[k].size());
        for (std::size_t c = 0; c < d.size(); ++c) d[c] = a[k][c] - b[k][c];
        acc += dt * l2_norm_sq(m, d);
    }
    return std::sqrt(acc);
}

std::vector<FieldP0> stress_history(const Trajectory& tr) {
    std::vector<FieldP0> out;
    out.reserve(tr.states.size());
    for (const auto& s : tr.states) out.push_back(s.sigma);
    return out;
}

}  // namespace perfplast
