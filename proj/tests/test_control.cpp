#include <doctest.h>

#include <cmath>
#include <random>

#include "perfplast/control.hpp"
#include "perfplast/scenarios.hpp"
#include "perfplast/studies.hpp"

using namespace perfplast;

namespace {

struct Setup {
    Scenario sc;
    Mesh m;
    TimeGrid grid;
    State init;
    ObjectiveSpec spec;
    ControlParam cp;
};

Setup make_setup(const Scenario& sc, int N) {
    Setup s{sc, sc.build_mesh(), TimeGrid(sc.T, N), {}, {}, {}};
    s.init = sc.initial_state(s.m);
    s.spec.mu_target.assign(N + 1, zero_field_p0(s.m));
    s.spec.v_target.assign(N + 1, zero_field_p1(s.m));
    s.cp = ControlParam::from_dirichlet(s.m, s.grid, [&](double t) {
        return interpolate_p1(s.m, [&](const std::array<double, 2>& x) { return sc.dirichlet_value(t, x); });
    });
    return s;
}

void fill_random_load(const ControlProblem& p, ControlParam& cp, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    for (std::size_t k = 1; k < cp.ell.size(); ++k)
        for (int i = 0; i < cp.ell[k].size(); ++i) cp.ell[k][i] = p.equilibrium().is_dirichlet_dof(i) ? 0.0 : d(rng);
}

}  // namespace

TEST_CASE("huber") {
    CHECK(huber(0.0, 0.1) == 0.0);
    CHECK(huber(0.05, 0.1) == doctest::Approx(0.0125));
    CHECK(huber(1.0, 0.1) == doctest::Approx(0.95));
    CHECK(huber(-1.0, 0.1) == huber(1.0, 0.1));
    CHECK(huber_slope(2.0, 0.1) == 1.0);
    CHECK(huber_slope(-0.05, 0.1) == doctest::Approx(-0.5));
}

TEST_CASE("constant state gives the Tikhonov floor") {
    Scenario sc = tension_scenario(4);
    Setup s = make_setup(sc, 5);
    const FieldP1 u0 = interpolate_p1(s.m, [](const std::array<double, 2>&) { return std::array<double, 2>{0.3, -0.1}; });
    const EquilibriumSolver eq(s.m, sc.material.elasticity);
    const auto sol = eq.solve(zero_field_p0(s.m), u0, LoadVector::Zero(s.m.num_dofs()));
    s.init = State{sol.u, sol.sigma, zero_field_p0(s.m)};
    s.cp = ControlParam::from_dirichlet(s.m, s.grid, [&](double) { return u0; });
    const ControlProblem p(s.m, sc.material, s.grid, s.init, s.spec);
    const ObjectiveEvaluation ev = p.evaluate(s.cp);
    CHECK(ev.terms.strain_tracking == 0.0);
    CHECK(ev.terms.velocity_tracking == 0.0);
    CHECK(ev.terms.load == 0.0);
    CHECK(ev.J == doctest::Approx(0.5 * s.spec.alpha * p.tikhonov(s.cp.uD)).epsilon(1e-14));
    CHECK(ev.sigma_dot_l2 == 0.0);
}

TEST_CASE("self-consistent targets and load scaling") {
    Setup s = make_setup(bending_scenario(4), 6);
    const ControlProblem base(s.m, s.sc.material, s.grid, s.init, s.spec);
    fill_random_load(base, s.cp, 1, 1e-2);
    targets_from_states(s.m, base.evaluate(s.cp).states, s.grid.dt(), s.spec);
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    const ObjectiveEvaluation ev = p.evaluate(s.cp);
    CHECK(ev.terms.strain_tracking <= 1e-24);
    CHECK(ev.terms.velocity_tracking <= 1e-24);
    CHECK(ev.terms.tikhonov == 0.5 * s.spec.alpha * p.tikhonov(s.cp.uD));
    CHECK(ev.terms.load == p.load_penalty_coefficient() * p.load_norm_sq(s.cp.ell));
    CHECK(ev.r_monitor <= s.spec.R_monitor);
}

TEST_CASE("doubling the load quadruples the load terms") {
    Setup s = make_setup(bending_scenario(4), 5);
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    fill_random_load(p, s.cp, 2, 1e-2);
    const ObjectiveEvaluation a = p.evaluate(s.cp);
    for (auto& e : s.cp.ell) e *= 2.0;
    const ObjectiveEvaluation b = p.evaluate(s.cp);
    CHECK(a.terms.load > 0.0);
    CHECK(b.terms.load == 4.0 * a.terms.load);
    CHECK(b.terms.load_rate == 4.0 * a.terms.load_rate);
}

TEST_CASE("load penalty scales with lambda^-theta") {
    Setup s = make_setup(bending_scenario(2), 2);
    for (double theta : {0.25, 0.5, 0.9}) {
        s.spec.theta = theta;
        s.spec.rp.lambda = 1e-2;
        const ControlProblem a(s.m, s.sc.material, s.grid, s.init, s.spec);
        s.spec.rp.lambda = 1e-3;
        const ControlProblem b(s.m, s.sc.material, s.grid, s.init, s.spec);
        CHECK(b.load_penalty_coefficient() == doctest::Approx(std::pow(10.0, theta) * a.load_penalty_coefficient()).epsilon(1e-15));
    }
    s.spec.theta = 1.0;
    CHECK_THROWS(ControlProblem(s.m, s.sc.material, s.grid, s.init, s.spec));
}

TEST_CASE("gradient structure") {
    Setup s = make_setup(bending_scenario(4), 4);
    s.spec.strain_weight = 0.0;
    s.spec.velocity_weight = 0.0;
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    ControlParam g;
    p.gradient(s.cp, g);
    const auto tg = p.tikhonov_gradient(s.cp.uD);
    for (int k = 0; k <= s.grid.N; ++k) {
        for (int i = 0; i < g.uD[k].size(); ++i) {
            const double want = (k == 0 && p.equilibrium().is_dirichlet_dof(i)) ? 0.0 : 0.5 * s.spec.alpha * tg[k][i];
            CHECK(g.uD[k][i] == doctest::Approx(want).epsilon(1e-12).scale(1e-12));
        }
    }

    Setup t = make_setup(bending_scenario(4), 4);
    const ControlProblem q(t.m, t.sc.material, t.grid, t.init, t.spec);
    fill_random_load(q, t.cp, 3, 1e-2);
    q.gradient(t.cp, g);
    CHECK(g.ell[0].cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < g.ell[1].size(); ++i)
        if (q.equilibrium().is_dirichlet_dof(i)) CHECK(g.ell[1][i] == 0.0);

    for (const auto& pr : probe_gradient(q, t.cp, 3, 4)) CHECK(pr.rel_error <= 1e-5);
}

TEST_CASE("adjoint needs the smoothed flow rule") {
    Setup s = make_setup(bending_scenario(2), 2);
    s.spec.rp.huber_eps = 0.0;
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    ControlParam g;
    CHECK_NOTHROW(p.evaluate(s.cp));
    CHECK_THROWS_AS(p.gradient(s.cp, g), std::invalid_argument);
}

TEST_CASE("infeasible controls are rejected") {
    Setup s = make_setup(bending_scenario(2), 2);
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    ControlParam bad = s.cp;
    bad.ell[0][3] = 1.0;
    CHECK_THROWS(p.evaluate(bad));
    bad = s.cp;
    bad.uD[0][p.equilibrium().constrained_dofs()[0]] += 1e-3;
    CHECK_THROWS(p.evaluate(bad));
}

TEST_CASE("pack and unpack") {
    Setup s = make_setup(bending_scenario(3), 3);
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    fill_random_load(p, s.cp, 5, 1.0);
    const Eigen::VectorXd x = p.pack(s.cp);
    CHECK(x.size() == p.num_free());
    const ControlParam back = p.unpack(x, s.cp);
    for (int k = 0; k <= s.grid.N; ++k) {
        CHECK(back.uD[k] == s.cp.uD[k]);
        CHECK(back.ell[k] == s.cp.ell[k]);
    }
}

TEST_CASE("lbfgs on a quadratic") {
    Eigen::VectorXd d(6);
    d << 1, 2, 5, 10, 50, 100;
    const SmoothFunction f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = d.cwiseProduct(x - Eigen::VectorXd::Ones(6));
        return 0.5 * (x - Eigen::VectorXd::Ones(6)).dot(g);
    };
    OptimizerOptions o;
    o.gradient_tol = 1e-12;
    const LbfgsResult r = minimize_lbfgs(f, Eigen::VectorXd::Zero(6), o);
    CHECK(r.converged);
    CHECK((r.x - Eigen::VectorXd::Ones(6)).norm() <= 1e-10);
    for (std::size_t i = 1; i < r.iterations.size(); ++i) CHECK(r.iterations[i].J < r.iterations[i - 1].J);
}

TEST_CASE("quadratic-only control problem") {
    Setup s = make_setup(bending_scenario(3), 3);
    s.spec.strain_weight = 0.0;
    s.spec.velocity_weight = 0.0;
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    fill_random_load(p, s.cp, 6, 1e-2);
    OptimizerOptions o;
    o.gradient_tol = 1e-10;
    o.max_iterations = 50;
    const OptReport r = optimize(p, s.cp, o);
    CHECK(r.converged);
    CHECK(r.grad_norm <= 1e-10);
    CHECK(r.iterations.size() <= 51);
    for (std::size_t i = 1; i < r.iterations.size(); ++i) CHECK(r.iterations[i].J < r.iterations[i - 1].J);
    CHECK_NOTHROW(p.check_feasible(r.controls));
    for (const auto& e : r.controls.ell) CHECK(e.cwiseAbs().maxCoeff() <= 1e-9);

    const OptReport again = optimize(p, r.controls, o);
    CHECK(std::abs(again.J - r.J) <= 1e-12);
}

TEST_CASE("realizable targets are recovered") {
    Setup s = make_setup(bending_scenario(4), 5);
    s.spec.alpha = 1e-4;
    const ControlProblem base(s.m, s.sc.material, s.grid, s.init, s.spec);
    targets_from_states(s.m, base.evaluate(s.cp).states, s.grid.dt(), s.spec);
    const ControlProblem p(s.m, s.sc.material, s.grid, s.init, s.spec);
    const double floor = p.evaluate(s.cp).J;

    ControlParam start = s.cp;
    for (int k = 1; k <= s.grid.N; ++k) start.uD[k] *= 0.5;
    OptimizerOptions o;
    o.max_iterations = 300;
    o.gradient_tol = 1e-10;
    const OptReport r = optimize(p, start, o);
    CHECK(r.J <= 1.1 * floor);
    CHECK_NOTHROW(p.check_feasible(r.controls));
}

TEST_CASE("elastic targets keep the load at zero across lambda") {
    Scenario sc = tension_scenario(4);
    sc.amplitude = 1e-2;
    Setup s = make_setup(sc, 4);
    const ControlProblem base(s.m, sc.material, s.grid, s.init, s.spec);
    targets_from_states(s.m, base.evaluate(s.cp).states, s.grid.dt(), s.spec);
    OptimizerOptions o;
    o.max_iterations = 40;
    const auto steps = lambda_continuation(s.m, sc.material, s.grid, s.init, s.spec, {1e-1, 1e-2, 1e-3}, s.cp, o);
    REQUIRE(steps.size() == 3);
    for (const auto& st : steps) {
        CHECK(st.ok);
        CHECK(st.load_norm <= 1e-6);
        CHECK(std::abs(st.J - steps[0].J) <= 1e-3 * steps[0].J);
    }
    CHECK_THROWS(lambda_continuation(s.m, sc.material, s.grid, s.init, s.spec, {1e-2, 1e-1}, s.cp, o));
}

TEST_CASE("larger theta drives the load down harder") {
    Setup s = make_setup(bending_scenario(4), 5);
    s.spec.alpha = 3e-2;
    {
        const Mesh& m = s.m;
        SolverConfig cfg;
        const PlasticitySolver solver(m, s.sc.material, cfg);
        const auto uD = s.sc.dirichlet_path(m, s.grid);
        const std::vector<LoadVector> ell(s.grid.N + 1, LoadVector::Zero(m.num_dofs()));
        targets_from_states(m, run_trajectory(solver, s.grid, uD, ell, s.init).states, s.grid.dt(), s.spec);
    }
    OptimizerOptions o;
    o.max_iterations = 60;
    std::vector<double> final_norm;
    for (double theta : {0.2, 0.8}) {
        s.spec.theta = theta;
        const auto steps = lambda_continuation(s.m, s.sc.material, s.grid, s.init, s.spec, {1e-1, 1e-2}, s.cp, o);
        final_norm.push_back(steps.back().load_norm);
    }
    CHECK(final_norm[1] < final_norm[0]);
}
