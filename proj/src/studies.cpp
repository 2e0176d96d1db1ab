#include "perfplast/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "perfplast/analytic_1d.hpp"

namespace perfplast {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

CheckResult timed(int id, const std::string& name, double max_seconds, const std::function<bool(std::string&)>& body) {
    CheckResult r;
    r.id = id;
    r.name = name;
    const auto t0 = Clock::now();
    try {
        r.pass = body(r.detail);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (max_seconds > 0.0 && r.seconds > max_seconds) {
        r.pass = false;
        r.detail += " runtime " + fmt(r.seconds) + "s > " + fmt(max_seconds) + "s";
    }
    return r;
}

Trajectory simulate(const Scenario& sc, const Mesh& m, const SolverConfig& cfg, int N) {
    const TimeGrid grid(sc.T, N);
    PlasticitySolver solver(m, sc.material, cfg);
    const auto uD = sc.dirichlet_path(m, grid);
    const std::vector<LoadVector> ell(N + 1, zero_field_p1(m));
    return run_trajectory(solver, grid, uD, ell, sc.initial_state(m));
}

SolverConfig config(Scheme s, double lambda, double huber_eps = 0.0) {
    SolverConfig cfg;
    cfg.scheme = s;
    cfg.rp = {lambda, huber_eps};
    cfg.smoothed = huber_eps > 0.0;
    return cfg;
}

SymTensor random_tensor(std::mt19937_64& rng, int dim, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    SymTensor t(dim);
    for (int k = 0; k < t.size(); ++k) t[k] = u(rng);
    return t;
}

}  // namespace

std::string format_check(const CheckResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " " << r.name << ": " << r.detail << " ("
       << fmt(r.seconds) << "s)";
    return os.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
    return sxy / sxx;
}

RateStudyResult rate_study(const RateStudyOptions& opts) {
    const Scenario bar = bar_scenario(opts.cells);
    const Mesh m = bar.build_mesh();
    const TimeGrid grid(bar.T, opts.N);
    const Material& mat = bar.material;
    const std::vector<FieldP0> w(grid.N + 1, FieldP0(m.num_cells(), SymTensor::identity(1) * opts.w));
    const FieldP0 s0 = zero_field_p0(m);

    RateStudyResult res;
    res.norm_C = mat.elasticity.norm_C(1);
    res.gamma_C = mat.elasticity.coercivity_C();
    const auto ref = evolve_flow_rule(mat, w, {0.0, 0.0}, grid, s0, Scheme::ImplicitEuler);
    for (int k = 1; k <= grid.N; ++k) {
        FieldP0 r(m.num_cells());
        for (int c = 0; c < m.num_cells(); ++c) {
            r[c] = w[k][c] - apply_A(mat.elasticity, (ref[k][c] - ref[k - 1][c]) * (1.0 / grid.dt()));
        }
        res.residual_sq += grid.dt() * l2_norm_sq(m, r);
    }

    std::vector<double> x, y;
    for (double lam : opts.lambdas) {
        const auto sol = evolve_flow_rule(mat, w, {lam, 0.0}, grid, s0, opts.scheme);
        RateStudyRow row;
        row.lambda = lam;
        row.gap = max_l2_gap(m, sol, ref);
        row.bound = std::sqrt(lam * res.norm_C * res.norm_C / res.gamma_C * res.residual_sq);
        res.rows.push_back(row);
        x.push_back(std::sqrt(lam));
        y.push_back(row.gap);
    }
    res.order = loglog_slope(x, y);
    return res;
}

CheckResult check_oned_benchmark() {
    return timed(1, "1d-benchmark", 2.0, [](std::string& d) {
        const Scenario bar = bar_scenario(4);
        const Mesh m = bar.build_mesh();
        auto err = [&](const Trajectory& tr) {
            double e = 0.0;
            for (int k = 0; k <= tr.grid.N; ++k) {
                const double exact = oned::exact_stress(tr.grid.t(k));
                for (const auto& s : tr.states[k].sigma) e = std::max(e, std::abs(s[0] - exact));
            }
            return e;
        };
        const auto t0 = Clock::now();
        const Trajectory imp = simulate(bar, m, config(Scheme::ImplicitEuler, 0.0), 200);
        const double t_imp = std::chrono::duration<double>(Clock::now() - t0).count();
        const auto t1 = Clock::now();
        const Trajectory exp = simulate(bar, m, config(Scheme::ExplicitEuler, 1e-4), 2000);
        const double t_exp = std::chrono::duration<double>(Clock::now() - t1).count();
        const double e_imp = err(imp), e_exp = err(exp);
        const double tol_imp = 1.5 * imp.grid.dt();
        d = "implicit err " + fmt(e_imp) + " <= " + fmt(tol_imp) + ", explicit err " + fmt(e_exp) + " <= 0.05, times " +
            fmt(t_imp) + "s/" + fmt(t_exp) + "s";
        return e_imp <= tol_imp && e_exp <= 5e-2 && t_imp <= 1.0 && t_exp <= 1.0;
    });
}

CheckResult check_yosida_rate() {
    return timed(2, "yosida-rate", 5.0, [](std::string& d) {
        const RateStudyResult rs = rate_study({});
        bool ok = rs.order >= 0.45;
        std::ostringstream os;
        for (const auto& r : rs.rows) {
            ok = ok && r.gap <= r.bound;
            os << " lambda=" << r.lambda << " gap=" << fmt(r.gap) << "/bound=" << fmt(r.bound);
        }
        d = "order " + fmt(rs.order) + " >= 0.45;" + os.str();
        return ok;
    });
}

CheckResult check_apriori_bound() {
    return timed(3, "a-priori-bound", 10.0, [](std::string& d) {
        bool ok = true;
        for (const Scenario& sc : shipped_2d_scenarios(8)) {
            const Mesh m = sc.build_mesh();
            const Trajectory tr = simulate(sc, m, config(Scheme::ImplicitEuler, 0.0), 50);
            const double rhs = h1h1_norm(m, sc.dirichlet_path(m, tr.grid), tr.grid) /
                               sc.material.elasticity.coercivity_A(m.dim()) * 1.05;
            ok = ok && tr.diag.sigma_dot_l2 <= rhs;
            d += sc.name + " " + fmt(tr.diag.sigma_dot_l2) + " <= " + fmt(rhs) + "; ";
        }
        return ok;
    });
}

void targets_from_states(const Mesh& m, const std::vector<State>& states, double dt, ObjectiveSpec& spec) {
    const int N = static_cast<int>(states.size()) - 1;
    spec.mu_target.assign(N + 1, zero_field_p0(m));
    spec.v_target.assign(N + 1, zero_field_p1(m));
    for (int k = 1; k <= N; ++k) {
        spec.v_target[k] = (states[k].u - states[k - 1].u) / dt;
        spec.mu_target[k] = strain(m, spec.v_target[k]);
    }
}

std::vector<GradientProbe> probe_gradient(const ControlProblem& problem, const ControlParam& cp, int directions,
                                          std::uint64_t seed, double rel_step) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    ControlParam g;
    problem.gradient(cp, g);
    const Eigen::VectorXd x = problem.pack(cp);
    const Eigen::VectorXd gx = problem.pack(g);
    std::vector<GradientProbe> out;
    for (int r = 0; r < directions; ++r) {
        Eigen::VectorXd dir(x.size());
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = nd(rng);
        const double h = rel_step * std::max(1.0, x.norm()) / dir.norm();
        const double fp = problem.evaluate(problem.unpack(x + h * dir, cp)).J;
        const double fm = problem.evaluate(problem.unpack(x - h * dir, cp)).J;
        GradientProbe p;
        p.fd = (fp - fm) / (2.0 * h);
        p.adjoint = gx.dot(dir);
        p.rel_error = std::abs(p.fd - p.adjoint) / std::max({std::abs(p.fd), std::abs(p.adjoint), 1e-300});
        out.push_back(p);
    }
    return out;
}

CheckResult check_gradient(std::uint64_t seed) {
    return timed(4, "gradient-check", 30.0, [seed](std::string& d) {
        const Scenario sc = bending_scenario(8);
        const Mesh m = sc.build_mesh();
        const TimeGrid grid(sc.T, 10);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        ObjectiveSpec spec;
        spec.mu_target.assign(grid.N + 1, zero_field_p0(m));
        spec.v_target.assign(grid.N + 1, zero_field_p1(m));
        for (int k = 1; k <= grid.N; ++k) {
            for (auto& t : spec.mu_target[k]) {
                for (int c = 0; c < t.size(); ++c) t[c] = 0.1 * nd(rng);
            }
            for (Eigen::Index i = 0; i < spec.v_target[k].size(); ++i) spec.v_target[k][i] = 0.1 * nd(rng);
        }
        spec.rp = {1e-2, 1e-2};
        const State init = sc.initial_state(m);
        ControlProblem problem(m, sc.material, grid, init, spec);
        ControlParam cp = ControlParam::from_dirichlet(m, grid, [&](double t) {
            return interpolate_p1(m, [&](const std::array<double, 2>& x) { return sc.dirichlet_value(t, x); });
        });
        for (int k = 1; k <= grid.N; ++k) {
            for (int dof : problem.equilibrium().free_dofs()) cp.ell[k][dof] = 0.01 * nd(rng);
        }
        const auto probes = probe_gradient(problem, cp, 5, seed + 1);
        double worst = 0.0;
        for (const auto& p : probes) worst = std::max(worst, p.rel_error);
        d = "max relative error " + fmt(worst) + " <= 1e-05 over 5 directions";
        return worst <= 1e-5;
    });
}

CheckResult check_operator_properties(std::uint64_t seed) {
    return timed(5, "operator-properties", 5.0, [seed](std::string& d) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> loglam(std::log(1e-2), 0.0);
        constexpr int kPairs = 10000;
        double min_mono = HUGE_VAL, max_lip = 0.0, max_tr = 0.0, max_bound = -HUGE_VAL;
        for (int dim = 1; dim <= 3; ++dim) {
            std::vector<YieldSet> sets{YieldSet::von_mises(1.0)};
            if (dim == 1) sets.push_back(YieldSet::uniaxial(1.0));
            for (const YieldSet& ys : sets) {
                for (int i = 0; i < kPairs; ++i) {
                    const RegularizationParams rp{std::exp(loglam(rng)), 0.0};
                    const SymTensor a = random_tensor(rng, dim, 2.0);
                    const SymTensor b = random_tensor(rng, dim, 2.0);
                    const SymTensor ga = yosida_deriv(ys, rp, a);
                    const SymTensor gb = yosida_deriv(ys, rp, b);
                    const SymTensor diff = a - b;
                    min_mono = std::min(min_mono, frob_inner(ga - gb, diff));
                    const double nd = frob_norm(diff);
                    if (nd > 0.0) max_lip = std::max(max_lip, frob_norm(ga - gb) / nd * rp.lambda);
                    if (ys.kind == YieldKind::VonMises) max_tr = std::max({max_tr, std::abs(ga.trace()), std::abs(gb.trace())});
                    max_bound = std::max(max_bound, frob_norm(ga) * rp.lambda - frob_norm(a));
                }
            }
        }
        d = "monotonicity min " + fmt(min_mono) + " >= -1e-12, lambda*Lipschitz max " + fmt(max_lip) +
            " <= 1+1e-12, |tr| max " + fmt(max_tr) + " <= 1e-14, lambda|dI|-|t| max " + fmt(max_bound) + " <= 0";
        return min_mono >= -1e-12 && max_lip <= 1.0 + 1e-12 && max_tr <= 1e-14 && max_bound <= 0.0;
    });
}

CheckResult check_patch_test(std::uint64_t seed) {
    return timed(6, "patch-test", 0.0, [seed](std::string& d) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double A[2][2] = {{u(rng), u(rng)}, {u(rng), u(rng)}};
        const double b[2] = {u(rng), u(rng)};
        const ElasticityTensor el(0.5, 0.5);
        SymTensor eps(2);
        eps.set(0, 0, A[0][0]);
        eps.set(1, 1, A[1][1]);
        eps.set(0, 1, 0.5 * (A[0][1] + A[1][0]));
        const SymTensor sig = apply_C(el, eps);
        double eu = 0.0, es = 0.0;
        for (int n : {2, 4, 8, 16}) {
            const Mesh m = build_rect_mesh(n, n, DirichletSpec{kAllSides});
            auto affine = [&](const std::array<double, 2>& x) {
                return std::array<double, 2>{A[0][0] * x[0] + A[0][1] * x[1] + b[0], A[1][0] * x[0] + A[1][1] * x[1] + b[1]};
            };
            const FieldP1 exact = interpolate_p1(m, affine);
            EquilibriumSolver eq(m, el);
            const auto sol = eq.solve(zero_field_p0(m), exact, zero_field_p1(m));
            eu = std::max(eu, (sol.u - exact).lpNorm<Eigen::Infinity>());
            for (const auto& s : sol.sigma) es = std::max(es, frob_norm(s - sig));
        }
        d = "meshes 2..16: displacement err " + fmt(eu) + ", stress err " + fmt(es) + " <= 1e-10";
        return eu <= 1e-10 && es <= 1e-10;
    });
}

CheckResult check_scheme_consistency() {
    return timed(7, "scheme-consistency", 0.0, [](std::string& d) {
        const Scenario sc = tension_scenario(4);
        const Mesh m = sc.build_mesh();
        constexpr double kLambda = 1e-3;
        // Coarsest grid sits at the explicit stability limit.
        const int N0 = static_cast<int>(std::ceil(sc.T / explicit_step_limit(sc.material, 2, kLambda) - 1e-9));
        std::vector<double> gaps;
        for (int h = 0; h < 4; ++h) {
            const int N = N0 << h;
            const Trajectory e = simulate(sc, m, config(Scheme::ExplicitEuler, kLambda), N);
            const Trajectory i = simulate(sc, m, config(Scheme::ImplicitEuler, kLambda), N);
            gaps.push_back(l2l2_gap(m, stress_history(e), stress_history(i), e.grid.dt()));
        }
        bool ok = true;
        d = "N0=" + std::to_string(N0) + " gaps";
        for (double g : gaps) d += " " + fmt(g);
        d += "; ratios";
        for (std::size_t k = 1; k < gaps.size(); ++k) {
            const double r = gaps[k] / gaps[k - 1];
            ok = ok && r >= 0.4 && r <= 0.6;
            d += " " + fmt(r);
        }
        d += " in [0.4, 0.6]";
        return ok;
    });
}

CheckResult check_continuation() {
    return timed(8, "lambda-continuation", 600.0, [](std::string& d) {
        const Scenario sc = bending_scenario(8);
        const Mesh m = sc.build_mesh();
        const TimeGrid grid(sc.T, 10);
        // Targets from the unregularized implicit solution.
        const Trajectory truth = simulate(sc, m, config(Scheme::ImplicitEuler, 0.0), grid.N);
        ObjectiveSpec spec;
        targets_from_states(m, truth.states, grid.dt(), spec);
        spec.theta = 0.5;
        spec.alpha = 3e-2;
        spec.rp.huber_eps = 1e-2;
        OptimizerOptions opts;
        opts.max_iterations = 200;
        opts.gradient_tol = 1e-7;
        const ControlParam cp0 = ControlParam::from_dirichlet(m, grid, [&](double t) {
            return interpolate_p1(m, [&](const std::array<double, 2>& x) { return sc.dirichlet_value(t, x); });
        });
        const std::vector<double> lambdas{1e-1, 3e-2, 1e-2, 3e-3};
        const auto steps = lambda_continuation(m, sc.material, grid, sc.initial_state(m), spec, lambdas, cp0, opts);
        bool ok = true;
        std::ostringstream os;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto& s = steps[i];
            ok = ok && s.ok;
            os << " lambda=" << s.lambda << " |ell|=" << fmt(s.load_norm) << " J=" << fmt(s.J);
            if (i > 0) ok = ok && s.load_norm <= 1.1 * steps[i - 1].load_norm;
        }
        const double Jn = steps.back().J, Jp = steps[steps.size() - 2].J;
        const double var = std::abs(Jn - Jp) / std::max(std::abs(Jn), std::abs(Jp));
        ok = ok && var <= 0.05;
        d = "|ell| non-increasing within 10%, last J change " + fmt(var) + " <= 0.05;" + os.str();
        return ok;
    });
}

CheckResult check_incompressibility() {
    return timed(9, "plastic-incompressibility", 0.0, [](std::string& d) {
        double worst = 0.0;
        int runs = 0;
        for (const Scenario& sc : shipped_2d_scenarios(8)) {
            const Mesh m = sc.build_mesh();
            for (const SolverConfig& cfg : {config(Scheme::ImplicitEuler, 0.0), config(Scheme::ImplicitEuler, 1e-2),
                                            config(Scheme::ExplicitEuler, 1e-2, 1e-2)}) {
                const Trajectory tr = simulate(sc, m, cfg, 50);
                worst = std::max(worst, tr.diag.max_trace_z);
                ++runs;
            }
        }
        d = "max |tr z| " + fmt(worst) + " <= 1e-12 over " + std::to_string(runs) + " runs";
        return worst <= 1e-12;
    });
}

CheckResult check_oracle() {
    return timed(10, "oracle-cross-validation", 0.0, [](std::string& d) {
        bool ok = true;
        for (const auto& v : {oned::Variant::linear(), oned::Variant::two_phase(0.5), oned::Variant::frozen(1.0, 0.5)}) {
            const auto rep = oned::verify_weak_solution(v, 200);
            ok = ok && rep.max_violation() <= 1e-10 && rep.points_checked > 0;
            d += v.name() + " " + fmt(rep.max_violation()) + "; ";
        }
        d += "<= 1e-10";
        return ok;
    });
}

std::vector<CheckResult> run_acceptance(std::uint64_t seed, const std::vector<int>& only) {
    const std::vector<std::function<CheckResult()>> checks{
        check_oned_benchmark,
        check_yosida_rate,
        check_apriori_bound,
        [seed] { return check_gradient(seed); },
        [seed] { return check_operator_properties(seed); },
        [seed] { return check_patch_test(seed); },
        check_scheme_consistency,
        check_continuation,
        check_incompressibility,
        check_oracle,
    };
    std::vector<CheckResult> out;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        out.push_back(checks[i]());
    }
    return out;
}

}  // namespace perfplast
