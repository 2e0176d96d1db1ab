#include "perfplast/control.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace perfplast {

double huber(double r, double eps) {
    const double a = std::abs(r);
    return a <= eps ? a * a / (2.0 * eps) : a - 0.5 * eps;
}

double huber_slope(double r, double eps) { return std::abs(r) <= eps ? r / eps : (r > 0.0 ? 1.0 : -1.0); }

ControlParam ControlParam::from_dirichlet(const Mesh& m, const TimeGrid& grid,
                                          const std::function<FieldP1(double)>& uD_fn) {
    ControlParam cp;
    for (int k = 0; k <= grid.N; ++k) {
        cp.uD.push_back(uD_fn(grid.t(k)));
        cp.ell.push_back(zero_field_p1(m));
    }
    return cp;
}

void ObjectiveSpec::validate(const Mesh& m, const TimeGrid& grid) const {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("ObjectiveSpec: theta must lie in (0, 1)");
    if (!(alpha > 0.0)) throw std::invalid_argument("ObjectiveSpec: alpha must be positive");
    if (!(huber_eps_obj > 0.0)) throw std::invalid_argument("ObjectiveSpec: huber_eps_obj must be positive");
    if (!(load_rate_weight >= 0.0)) throw std::invalid_argument("ObjectiveSpec: load_rate_weight must be >= 0");
    if (!(strain_weight >= 0.0) || !(velocity_weight >= 0.0)) {
        throw std::invalid_argument("ObjectiveSpec: tracking weights must be >= 0");
    }
    if (!(rp.lambda > 0.0)) throw std::invalid_argument("ObjectiveSpec: lambda must be positive");
    if (!(R_monitor > 0.0)) throw std::invalid_argument("ObjectiveSpec: R_monitor must be positive");
    if (static_cast<int>(mu_target.size()) != grid.N + 1 || static_cast<int>(v_target.size()) != grid.N + 1) {
        throw std::invalid_argument("ObjectiveSpec: targets need N + 1 time entries");
    }
    for (int k = 1; k <= grid.N; ++k) {
        if (static_cast<int>(mu_target[k].size()) != m.num_cells() || v_target[k].size() != m.num_dofs()) {
            throw std::invalid_argument("ObjectiveSpec: target fields do not match the mesh");
        }
    }
}

struct ControlProblem::Forward {
    std::vector<State> coarse;
    std::vector<FieldP0> sigma_fine;  // every fine step, only when requested
    double max_trace_z = 0.0;
};

ControlProblem::ControlProblem(const Mesh& mesh, const Material& mat, const TimeGrid& grid, const State& init,
                               const ObjectiveSpec& spec)
    : mat_(mat), grid_(grid), init_(init), spec_(spec), eq_(mesh, mat.elasticity) {
    spec_.validate(mesh, grid);
    gram_h1_ = h1_gram(mesh);
    const SparseMatrix H = recovered_hessian(mesh);
    gram_x_ = gram_h1_ + SparseMatrix(H.transpose() * H);
    lumped_ = mesh.lumped_mass();
    const double limit = explicit_step_limit(mat, mesh.dim(), spec_.rp.lambda);
    substeps_ = std::max(1, static_cast<int>(std::ceil(grid.dt() / limit - 1e-9)));

    // Hessian of alpha/2 Tik in packed uD coordinates.
    const int N = grid.N, nd = mesh.num_dofs(), n0 = eq_.num_free_dofs();
    const double dt = grid.dt();
    std::vector<int> local(nd, -1);
    for (int i = 0; i < n0; ++i) local[eq_.free_dofs()[i]] = i;
    auto index = [&](int k, int d) { return k == 0 ? local[d] : n0 + (k - 1) * nd + d; };
    std::vector<Eigen::Triplet<double>> trip;
    auto add_block = [&](int k, int l, const SparseMatrix& A, double s) {
        for (int o = 0; o < A.outerSize(); ++o) {
            for (SparseMatrix::InnerIterator it(A, o); it; ++it) {
                const int r = index(k, static_cast<int>(it.row())), c = index(l, static_cast<int>(it.col()));
                if (r >= 0 && c >= 0) trip.emplace_back(r, c, s * it.value());
            }
        }
    };
    for (int k = 0; k <= N; ++k) {
        const double w = (k == 0 || k == N) ? 0.5 * dt : dt;
        add_block(k, k, gram_x_, spec_.alpha * w);
        add_block(k, k, gram_h1_, spec_.alpha * ((k == 0 || k == N) ? 1.0 : 2.0) / dt);
        if (k > 0) {
            add_block(k, k - 1, gram_h1_, -spec_.alpha / dt);
            add_block(k - 1, k, gram_h1_, -spec_.alpha / dt);
        }
    }
    SparseMatrix Hu(n0 + N * nd, n0 + N * nd);
    Hu.setFromTriplets(trip.begin(), trip.end());
    auto factor = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(Hu);
    if (factor->info() != Eigen::Success) throw SolverError("ControlProblem: Tikhonov Hessian is not positive definite");
    tik_factor_ = factor;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
    const double pen = load_penalty_coefficient(), wl = spec_.load_rate_weight;
    for (int k = 0; k < N; ++k) {
        T(k, k) = pen * dt + wl / dt * (k + 1 < N ? 2.0 : 1.0);
        if (k + 1 < N) T(k, k + 1) = T(k + 1, k) = -wl / dt;
    }
    load_time_inverse_ = T.llt().solve(Eigen::MatrixXd::Identity(N, N));
}

Eigen::VectorXd ControlProblem::apply_quadratic_inverse(const Eigen::VectorXd& g) const {
    if (g.size() != num_free()) throw std::invalid_argument("apply_quadratic_inverse: wrong vector length");
    const int N = grid_.N, nf = eq_.num_free_dofs();
    const int nu = nf + N * mesh().num_dofs();
    Eigen::VectorXd out(g.size());
    out.head(nu) = tik_factor_->solve(g.head(nu));
    Eigen::MatrixXd Y(nf, N);
    for (int k = 0; k < N; ++k) Y.col(k) = eq_.stiffness_free() * g.segment(nu + k * nf, nf);
    const Eigen::MatrixXd Z = 0.5 * Y * load_time_inverse_;
    for (int k = 0; k < N; ++k) out.segment(nu + k * nf, nf) = Z.col(k);
    return out;
}

double ControlProblem::load_penalty_coefficient() const { return std::pow(spec_.rp.lambda, -spec_.theta); }

double ControlProblem::tikhonov(const std::vector<FieldP1>& uD) const {
    const double dt = grid_.dt();
    double acc = 0.0;
    for (int k = 0; k <= grid_.N; ++k) {
        const double w = (k == 0 || k == grid_.N) ? 0.5 * dt : dt;
        acc += w * uD[k].dot(gram_x_ * uD[k]);
        if (k > 0) {
            const Eigen::VectorXd r = (uD[k] - uD[k - 1]) / dt;
            acc += dt * r.dot(gram_h1_ * r);
        }
    }
    return acc;
}

std::vector<FieldP1> ControlProblem::tikhonov_gradient(const std::vector<FieldP1>& uD) const {
    const double dt = grid_.dt();
    std::vector<FieldP1> g(uD.size(), zero_field_p1(mesh()));
    for (int k = 0; k <= grid_.N; ++k) {
        const double w = (k == 0 || k == grid_.N) ? 0.5 * dt : dt;
        g[k] += 2.0 * w * (gram_x_ * uD[k]);
        if (k > 0) {
            const Eigen::VectorXd gr = 2.0 * (gram_h1_ * ((uD[k] - uD[k - 1]) / dt));
            g[k] += gr;
            g[k - 1] -= gr;
        }
    }
    return g;
}

double ControlProblem::load_norm_sq(const std::vector<LoadVector>& ell) const {
    double acc = 0.0;
    for (int k = 1; k <= grid_.N; ++k) acc += grid_.dt() * eq_.dual_norm_sq(ell[k]);
    return acc;
}

void ControlProblem::check_feasible(const ControlParam& cp) const {
    if (static_cast<int>(cp.uD.size()) != grid_.N + 1 || static_cast<int>(cp.ell.size()) != grid_.N + 1) {
        throw std::invalid_argument("ControlParam: expected N + 1 time entries");
    }
    for (int k = 0; k <= grid_.N; ++k) {
        if (cp.uD[k].size() != mesh().num_dofs() || cp.ell[k].size() != mesh().num_dofs()) {
            throw std::invalid_argument("ControlParam: field does not match the mesh");
        }
    }
    for (int d : eq_.constrained_dofs()) {
        if (cp.uD[0][d] != init_.u[d]) throw std::invalid_argument("ControlParam: uD(0) must equal u0 on Gamma_D");
    }
    for (int d = 0; d < mesh().num_dofs(); ++d) {
        if (cp.ell[0][d] != 0.0) throw std::invalid_argument("ControlParam: ell(0) must vanish");
    }
}

ControlProblem::Forward ControlProblem::run_forward(const ControlParam& cp, bool keep_fine) const {
    const Mesh& m = mesh();
    const int nc = m.num_cells();
    const int s = substeps_;
    const double h = grid_.dt() / s;
    const bool smoothed = spec_.rp.huber_eps > 0.0;

    Forward fw;
    fw.coarse.reserve(grid_.N + 1);
    fw.coarse.push_back(init_);
    if (keep_fine) {
        fw.sigma_fine.reserve(static_cast<std::size_t>(grid_.N * s + 1));
        fw.sigma_fine.push_back(init_.sigma);
    }
    State cur = init_;
    for (int k = 1; k <= grid_.N; ++k) {
        for (int sub = 1; sub <= s; ++sub) {
            const double w = static_cast<double>(sub) / s;
            for (int c = 0; c < nc; ++c) cur.z[c] += flow_rate(mat_, spec_.rp, smoothed, cur.sigma[c]) * h;
            const FieldP1 uD = (1.0 - w) * cp.uD[k - 1] + w * cp.uD[k];
            const LoadVector ell = (1.0 - w) * cp.ell[k - 1] + w * cp.ell[k];
            cur.u = eq_.solve_displacement(cur.z, uD, ell);
            cur.sigma = eq_.stress(cur.u, cur.z);
            if (keep_fine) fw.sigma_fine.push_back(cur.sigma);
        }
        if (mat_.yield.kind == YieldKind::VonMises) fw.max_trace_z = std::max(fw.max_trace_z, max_abs_trace(cur.z));
        fw.coarse.push_back(cur);
    }
    return fw;
}

ObjectiveEvaluation ControlProblem::evaluate(const ControlParam& cp) const {
    check_feasible(cp);
    const Mesh& m = mesh();
    const int n = m.dim();
    const double dt = grid_.dt();
    const double eps = spec_.huber_eps_obj;
    Forward fw = run_forward(cp, false);

    ObjectiveEvaluation ev;
    ev.substeps = substeps_;
    double sdot = 0.0;
    for (int k = 1; k <= grid_.N; ++k) {
        const FieldP1 rate = (fw.coarse[k].u - fw.coarse[k - 1].u) / dt;
        const FieldP0 e = strain(m, rate);
        double a = 0.0;
        for (int c = 0; c < m.num_cells(); ++c) a += m.cell_volume(c) * huber(frob_norm(e[c] - spec_.mu_target[k][c]), eps);
        double b = 0.0;
        for (int node = 0; node < m.num_nodes(); ++node) {
            double r2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = rate[node * n + i] - spec_.v_target[k][node * n + i];
                r2 += d * d;
            }
            b += lumped_[node] * huber(std::sqrt(r2), eps);
        }
        ev.terms.strain_tracking += spec_.strain_weight * dt * a * a;
        ev.terms.velocity_tracking += spec_.velocity_weight * dt * b * b;

        FieldP0 sd(m.num_cells());
        for (int c = 0; c < m.num_cells(); ++c) sd[c] = (fw.coarse[k].sigma[c] - fw.coarse[k - 1].sigma[c]) * (1.0 / dt);
        sdot += dt * l2_norm_sq(m, sd);
    }
    ev.terms.tikhonov = 0.5 * spec_.alpha * tikhonov(cp.uD);
    const double lnorm = load_norm_sq(cp.ell);
    ev.terms.load = load_penalty_coefficient() * lnorm;
    double lrate = 0.0;
    for (int k = 1; k <= grid_.N; ++k) lrate += dt * eq_.dual_norm_sq((cp.ell[k] - cp.ell[k - 1]) / dt);
    ev.terms.load_rate = spec_.load_rate_weight * lrate;
    ev.J = ev.terms.total();

    ev.sigma_dot_l2 = std::sqrt(sdot);
    for (const auto& st : fw.coarse) ev.w1p_sup = std::max(ev.w1p_sup, recovered_w1p_norm(m, st.sigma, 4.0));
    ev.r_monitor = ev.sigma_dot_l2 + ev.w1p_sup;
    ev.max_trace_z = fw.max_trace_z;
    ev.load_norm = std::sqrt(lnorm);
    ev.states = std::move(fw.coarse);
    return ev;
}

double ControlProblem::gradient(const ControlParam& cp, ControlParam& grad) const {
    if (!(spec_.rp.huber_eps > 0.0)) {
        throw std::invalid_argument("gradient: the adjoint requires the smoothed flow rule (huber_eps > 0)");
    }
    check_feasible(cp);
    const Mesh& m = mesh();
    const int n = m.dim();
    const int nc = m.num_cells();
    const int N = grid_.N;
    const int s = substeps_;
    const double dt = grid_.dt();
    const double h = dt / s;
    const double eps = spec_.huber_eps_obj;
    Forward fw = run_forward(cp, true);

    // Tracking terms and their derivatives with respect to the coarse u_k.
    std::vector<FieldP1> ubar(N + 1, zero_field_p1(m));
    ObjectiveTerms terms;
    for (int k = 1; k <= N; ++k) {
        const FieldP1 rate = (fw.coarse[k].u - fw.coarse[k - 1].u) / dt;
        const FieldP0 e = strain(m, rate);
        double a = 0.0;
        FieldP0 da(nc, SymTensor::zero(n));
        for (int c = 0; c < nc; ++c) {
            const SymTensor d = e[c] - spec_.mu_target[k][c];
            const double r = frob_norm(d);
            a += m.cell_volume(c) * huber(r, eps);
            if (r > 0.0) da[c] = d * (m.cell_volume(c) * huber_slope(r, eps) / r);
        }
        double b = 0.0;
        FieldP1 db = zero_field_p1(m);
        for (int node = 0; node < m.num_nodes(); ++node) {
            double r2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = rate[node * n + i] - spec_.v_target[k][node * n + i];
                r2 += d * d;
            }
            const double r = std::sqrt(r2);
            b += lumped_[node] * huber(r, eps);
            if (r > 0.0) {
                for (int i = 0; i < n; ++i) {
                    db[node * n + i] =
                        lumped_[node] * huber_slope(r, eps) * (rate[node * n + i] - spec_.v_target[k][node * n + i]) / r;
                }
            }
        }
        terms.strain_tracking += spec_.strain_weight * dt * a * a;
        terms.velocity_tracking += spec_.velocity_weight * dt * b * b;
        // d/d rate, then rate = (u_k - u_{k-1}) / dt
        const FieldP1 drate = spec_.strain_weight * dt * 2.0 * a * strain_transpose(m, da) +
                              spec_.velocity_weight * dt * 2.0 * b * db;
        ubar[k] += drate / dt;
        ubar[k - 1] -= drate / dt;
    }

    grad.uD.assign(N + 1, zero_field_p1(m));
    grad.ell.assign(N + 1, zero_field_p1(m));

    // Reverse sweep over fine steps j = M..1.
    //   z_j = z_{j-1} + h g(sigma_{j-1})
    //   u_j = S(z_j, uD_j, ell_j)
    //   sigma_j = C (strain(u_j) - z_j)
    FieldP0 zbar(nc, SymTensor::zero(n));
    FieldP0 sbar(nc, SymTensor::zero(n));
    const int M = N * s;
    for (int j = M; j >= 1; --j) {
        const int k = (j + s - 1) / s;
        const int sub = j - (k - 1) * s;
        const double w = static_cast<double>(sub) / s;

        FieldP1 ub = (sub == s) ? ubar[k] : zero_field_p1(m);
        FieldP0 cs(nc);
        for (int c = 0; c < nc; ++c) cs[c] = apply_C(mat_.elasticity, sbar[c]);
        ub += strain_transpose(m, cs);
        for (int c = 0; c < nc; ++c) zbar[c] -= cs[c];

        const FieldP1 y = eq_.solve_homogeneous(ub);
        const FieldP0 bty = eq_.plastic_load_transpose(y);
        for (int c = 0; c < nc; ++c) zbar[c] += bty[c];

        // Dirichlet part: u_D = uD_D directly, u_F depends on it through -K_FD.
        FieldP1 uDbar = eq_.lifting_transpose(y);
        for (int d : eq_.constrained_dofs()) uDbar[d] += ub[d];
        grad.uD[k] += w * uDbar;
        grad.uD[k - 1] += (1.0 - w) * uDbar;
        grad.ell[k] += w * y;
        grad.ell[k - 1] += (1.0 - w) * y;

        const FieldP0& sprev = fw.sigma_fine[j - 1];
        for (int c = 0; c < nc; ++c) sbar[c] = yosida_deriv_smoothed_jvp(mat_.yield, spec_.rp, sprev[c], zbar[c]) * h;
    }

    // Direct control terms.
    terms.tikhonov = 0.5 * spec_.alpha * tikhonov(cp.uD);
    const auto tg = tikhonov_gradient(cp.uD);
    for (int k = 0; k <= N; ++k) grad.uD[k] += 0.5 * spec_.alpha * tg[k];

    const double pen = load_penalty_coefficient();
    double lnorm = 0.0, lrate = 0.0;
    for (int k = 1; k <= N; ++k) {
        const FieldP1 kinv = eq_.solve_homogeneous(cp.ell[k]);
        lnorm += dt * cp.ell[k].dot(kinv);
        grad.ell[k] += 2.0 * pen * dt * kinv;
        const LoadVector q = (cp.ell[k] - cp.ell[k - 1]) / dt;
        const FieldP1 qinv = eq_.solve_homogeneous(q);
        lrate += dt * q.dot(qinv);
        grad.ell[k] += 2.0 * spec_.load_rate_weight * qinv;
        grad.ell[k - 1] -= 2.0 * spec_.load_rate_weight * qinv;
    }
    terms.load = pen * lnorm;
    terms.load_rate = spec_.load_rate_weight * lrate;

    // Eliminated coefficients.
    for (int d : eq_.constrained_dofs()) {
        grad.uD[0][d] = 0.0;
        for (int k = 0; k <= N; ++k) grad.ell[k][d] = 0.0;
    }
    grad.ell[0].setZero();
    return terms.total();
}

int ControlProblem::num_free() const {
    const int nd = mesh().num_dofs();
    const int nfree = eq_.num_free_dofs();
    return nfree + grid_.N * nd + grid_.N * nfree;
}

Eigen::VectorXd ControlProblem::pack(const ControlParam& cp) const {
    Eigen::VectorXd x(num_free());
    int p = 0;
    for (int d : eq_.free_dofs()) x[p++] = cp.uD[0][d];
    for (int k = 1; k <= grid_.N; ++k) {
        x.segment(p, mesh().num_dofs()) = cp.uD[k];
        p += mesh().num_dofs();
    }
    for (int k = 1; k <= grid_.N; ++k) {
        for (int d : eq_.free_dofs()) x[p++] = cp.ell[k][d];
    }
    return x;
}

ControlParam ControlProblem::unpack(const Eigen::VectorXd& x, const ControlParam& base) const {
    if (x.size() != num_free()) throw std::invalid_argument("unpack: wrong vector length");
    ControlParam cp = base;
    int p = 0;
    for (int d : eq_.free_dofs()) cp.uD[0][d] = x[p++];
    for (int k = 1; k <= grid_.N; ++k) {
        cp.uD[k] = x.segment(p, mesh().num_dofs());
        p += mesh().num_dofs();
    }
    cp.ell[0].setZero();
    for (int k = 1; k <= grid_.N; ++k) {
        cp.ell[k].setZero();
        for (int d : eq_.free_dofs()) cp.ell[k][d] = x[p++];
    }
    return cp;
}

LbfgsResult minimize_lbfgs(const SmoothFunction& f, Eigen::VectorXd x, const OptimizerOptions& opts) {
    LbfgsResult res;
    Eigen::VectorXd g(x.size());
    double fx = f(x, g);
    res.evaluations = 1;
    std::deque<Eigen::VectorXd> S, Y;
    std::deque<double> rho;

    auto H0 = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return opts.inverse_hessian_guess ? opts.inverse_hessian_guess(v) : v;
    };
    auto record = [&](int it, int ls, double step) {
        res.iterations.push_back({it, fx, g.norm(), ls, step});
    };
    record(0, 0, 0.0);

    for (int it = 1;; ++it) {
        if (g.norm() <= opts.gradient_tol) {
            res.converged = true;
            res.status = "converged";
            break;
        }
        if (it > opts.max_iterations) {
            res.status = "iteration budget exhausted";
            break;
        }
        if (res.evaluations >= opts.max_evaluations) {
            res.status = "evaluation budget exhausted";
            break;
        }

        // Two-loop recursion.
        Eigen::VectorXd q = g;
        std::vector<double> a(S.size());
        for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
            a[i] = rho[i] * S[i].dot(q);
            q -= a[i] * Y[i];
        }
        double gamma = 1.0;
        if (!S.empty()) gamma = S.back().dot(Y.back()) / Y.back().dot(H0(Y.back()));
        else if (!opts.inverse_hessian_guess) gamma = 1.0 / std::max(1.0, g.norm());
        Eigen::VectorXd d = gamma * H0(q);
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double b = rho[i] * Y[i].dot(d);
            d += S[i] * (a[i] - b);
        }
        d = -d;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            S.clear();
            Y.clear();
            rho.clear();
            d = -g / std::max(1.0, g.norm());
            slope = g.dot(d);
        }

        double step = 1.0;
        int ls = 0;
        bool accepted = false;
        Eigen::VectorXd xn, gn(x.size());
        double fn = 0.0;
        while (ls < opts.max_backtracks && res.evaluations < opts.max_evaluations) {
            xn = x + step * d;
            fn = f(xn, gn);
            ++res.evaluations;
            ++ls;
            if (std::isfinite(fn) && fn <= fx + opts.armijo * step * slope && fn < fx) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.status = "line search failed";
            break;
        }
        const Eigen::VectorXd sv = xn - x;
        const Eigen::VectorXd yv = gn - g;
        const double sy = sv.dot(yv);
        if (sy > 1e-16 * sv.norm() * yv.norm()) {
            S.push_back(sv);
            Y.push_back(yv);
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > opts.memory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        }
        x = std::move(xn);
        g = gn;
        fx = fn;
        record(it, ls, step);
    }
    res.x = std::move(x);
    res.f = fx;
    res.grad_norm = g.norm();
    return res;
}

OptReport optimize(const ControlProblem& problem, const ControlParam& cp0, const OptimizerOptions& opts) {
    problem.check_feasible(cp0);
    SmoothFunction fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& gx) {
        const ControlParam cp = problem.unpack(x, cp0);
        ControlParam g;
        const double J = problem.gradient(cp, g);
        gx = problem.pack(g);
        return J;
    };
    OptimizerOptions o = opts;
    if (!o.inverse_hessian_guess) {
        o.inverse_hessian_guess = [&problem](const Eigen::VectorXd& v) { return problem.apply_quadratic_inverse(v); };
    }
    LbfgsResult r = minimize_lbfgs(fn, problem.pack(cp0), o);
    OptReport rep;
    rep.iterations = std::move(r.iterations);
    rep.controls = problem.unpack(r.x, cp0);
    rep.J = r.f;
    rep.grad_norm = r.grad_norm;
    rep.evaluations = r.evaluations;
    rep.converged = r.converged;
    rep.status = r.status;
    return rep;
}

std::vector<ContinuationStep> lambda_continuation(const Mesh& mesh, const Material& mat, const TimeGrid& grid,
                                                  const State& init, const ObjectiveSpec& base,
                                                  const std::vector<double>& lambdas, const ControlParam& cp0,
                                                  const OptimizerOptions& opts) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw std::invalid_argument("lambda_continuation: lambdas must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
            throw std::invalid_argument("lambda_continuation: lambdas must be strictly decreasing");
        }
    }
    std::vector<ContinuationStep> out;
    ControlParam warm = cp0;
    std::optional<Eigen::VectorXd> prev_x;
    for (double lam : lambdas) {
        ContinuationStep step;
        step.lambda = lam;
        try {
            ObjectiveSpec spec = base;
            spec.rp.lambda = lam;
            ControlProblem problem(mesh, mat, grid, init, spec);
            step.report = optimize(problem, warm, opts);
            const ObjectiveEvaluation ev = problem.evaluate(step.report.controls);
            step.terms = ev.terms;
            step.J = ev.J;
            step.load_norm = ev.load_norm;
            step.sigma_dot_l2 = ev.sigma_dot_l2;
            step.r_monitor = ev.r_monitor;
            const Eigen::VectorXd x = problem.pack(step.report.controls);
            if (prev_x) step.control_drift = (x - *prev_x).norm() / std::max(1.0, prev_x->norm());
            prev_x = x;
            warm = step.report.controls;
        } catch (const std::exception& e) {
            step.ok = false;
            step.error = e.what();
        }
        out.push_back(std::move(step));
    }
    return out;
}

}  // namespace perfplast
