#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "perfplast/plasticity.hpp"
#include "perfplast/scenarios.hpp"

using namespace perfplast;

namespace {

Trajectory run_scenario(const Scenario& sc, int N, const SolverConfig& cfg) {
    const Mesh m = sc.build_mesh();
    const PlasticitySolver solver(m, sc.material, cfg);
    const TimeGrid grid(sc.T, N);
    const auto uD = sc.dirichlet_path(m, grid);
    const std::vector<LoadVector> ell(N + 1, LoadVector::Zero(m.num_dofs()));
    return run_trajectory(solver, grid, uD, ell, sc.initial_state(m));
}

}  // namespace

TEST_CASE("local return stays on the yield surface") {
    const Material mat{ElasticityTensor(0.5, 0.5), YieldSet::von_mises(0.25)};
    SymTensor trial(2);
    trial.set(0, 1, 1.0);
    const LocalReturn r = local_return(mat, {0.0, 0.0}, false, 0.1, trial);
    CHECK(frob_norm(deviator(r.sigma)) == doctest::Approx(0.25));
    CHECK(std::abs(r.dz.trace()) <= 1e-15);
    SymTensor small(2);
    small.set(0, 1, 0.1);
    CHECK(local_return(mat, {0.0, 0.0}, false, 0.1, small).sigma == small);
}

TEST_CASE("elastic step leaves z unchanged") {
    Scenario sc = tension_scenario(4);
    sc.amplitude = 1e-3;
    for (Scheme s : {Scheme::ExplicitEuler, Scheme::ImplicitEuler}) {
        SolverConfig cfg;
        cfg.scheme = s;
        cfg.rp.lambda = 1e-2;
        const Trajectory tr = run_scenario(sc, 5, cfg);
        for (const auto& st : tr.states)
            for (const auto& z : st.z) CHECK(z == SymTensor::zero(2));
    }
}

TEST_CASE("constant inputs give a constant trajectory") {
    Scenario sc = tension_scenario(4);
    sc.loading = LoadingKind::Constant;
    sc.amplitude = 0.05;
    SolverConfig cfg;
    cfg.scheme = Scheme::ExplicitEuler;
    cfg.rp.lambda = 1e-2;
    const Trajectory tr = run_scenario(sc, 10, cfg);
    for (const auto& st : tr.states) {
        CHECK(st.u == tr.states[0].u);
        CHECK(st.sigma == tr.states[0].sigma);
        CHECK(st.z == tr.states[0].z);
    }
    CHECK(tr.diag.sigma_dot_l2 == 0.0);
}

TEST_CASE("1D explicit run tracks the elastic branch") {
    const Scenario sc = bar_scenario(4);
    SolverConfig cfg;
    cfg.scheme = Scheme::ExplicitEuler;
    cfg.rp.lambda = 1e-4;
    const Trajectory tr = run_scenario(sc, 2000, cfg);
    for (const auto& s : tr.states[500].sigma) CHECK(std::abs(s[0] - 0.5) <= 2e-2);
}

TEST_CASE("1D implicit run reproduces the kink") {
    const Scenario sc = bar_scenario(4);
    SolverConfig cfg;
    const int N = 200;
    const Trajectory tr = run_scenario(sc, N, cfg);
    for (int k = 0; k <= N; ++k) {
        const double exact = std::min(2.0 * tr.grid.t(k), 1.0);
        for (const auto& s : tr.states[k].sigma) CHECK(std::abs(s[0] - exact) <= tr.grid.dt());
    }
    CHECK(tr.states[N / 2].sigma[0][0] == doctest::Approx(1.0));
    CHECK(tr.states[N / 2 - 10].sigma[0][0] < 1.0 - 1e-3);
    CHECK(tr.states[N].sigma[0][0] == doctest::Approx(1.0));
}

TEST_CASE("admissibility, dissipation and trace on 2D scenarios") {
    for (const Scenario& sc : shipped_2d_scenarios(6)) {
        SolverConfig cfg;
        const Trajectory tr = run_scenario(sc, 30, cfg);
        CHECK(tr.diag.max_stress_excess <= 1e-12);
        CHECK(tr.diag.min_dissipation >= -1e-12);
        CHECK(tr.diag.max_trace_z <= 1e-12);

        SolverConfig ex;
        ex.scheme = Scheme::ExplicitEuler;
        ex.rp.lambda = 1e-2;
        const Trajectory te = run_scenario(sc, 30, ex);
        CHECK(te.diag.min_dissipation >= -1e-12);
        CHECK(te.diag.max_trace_z <= 1e-12);
    }
}

TEST_CASE("implicit and explicit schemes converge together") {
    const Scenario sc = tension_scenario(4);
    SolverConfig im;
    im.rp.lambda = 1e-2;
    SolverConfig ex = im;
    ex.scheme = Scheme::ExplicitEuler;
    std::vector<double> gaps;
    for (int N : {40, 80, 160}) {
        const Trajectory a = run_scenario(sc, N, im), b = run_scenario(sc, N, ex);
        gaps.push_back(l2l2_gap(sc.build_mesh(), stress_history(a), stress_history(b), a.grid.dt()));
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("flow rule evolution") {
    const Material bar{ElasticityTensor(0.0, 0.5), YieldSet::uniaxial(1.0)};
    const TimeGrid grid(1.0, 100);
    FieldP0 sigma0(3, SymTensor::zero(1));
    sigma0[1][0] = 0.4;
    const std::vector<FieldP0> zero_w(grid.N + 1, FieldP0(3, SymTensor::zero(1)));
    for (const auto& s : evolve_flow_rule(bar, zero_w, {0.0, 0.0}, grid, sigma0)) CHECK(s == sigma0);

    const std::vector<FieldP0> w(grid.N + 1, FieldP0(1, SymTensor::identity(1) * 2.0));
    const auto hist = evolve_flow_rule(bar, w, {0.0, 0.0}, grid, FieldP0(1, SymTensor::zero(1)));
    for (int k = 0; k <= grid.N; ++k) CHECK(std::abs(hist[k][0][0] - std::min(2.0 * grid.t(k), 1.0)) <= grid.dt());

    const auto reg = evolve_flow_rule(bar, w, {1e-2, 0.0}, grid, FieldP0(1, SymTensor::zero(1)));
    CHECK(reg[grid.N][0][0] > 1.0);
}

TEST_CASE("explicit step requires lambda > 0") {
    const Scenario sc = bar_scenario(2);
    SolverConfig cfg;
    cfg.scheme = Scheme::ExplicitEuler;
    CHECK_THROWS(PlasticitySolver(sc.build_mesh(), sc.material, cfg));
}
