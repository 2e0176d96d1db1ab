import os
import pathlib

import numpy as np
import pytest

import perfplast as pp

SCENARIOS = pathlib.Path(os.environ.get("PERFPLAST_SCENARIOS", pathlib.Path(__file__).parents[2] / "scenarios"))


def test_tensor_and_yield():
    assert np.array_equal(pp.deviator(np.eye(2)), np.zeros((2, 2)))
    assert pp.project(np.array([[1.5]]), 1.0, "uniaxial")[0, 0] == 1.0
    assert pp.yosida_value(np.array([[1.5]]), 1.0, 0.1, "uniaxial") == pytest.approx(1.25)
    assert pp.yosida_deriv(np.array([[1.5]]), 1.0, 0.1, kind="uniaxial")[0, 0] == pytest.approx(5.0)
    g = pp.yosida_deriv(np.array([[2.0, 0.3], [0.3, -1.0]]), 0.5, 0.1, huber_eps=0.01)
    assert abs(np.trace(g)) <= 1e-14
    with pytest.raises(ValueError):
        pp.deviator(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_oracle():
    assert pp.exact_stress(0.25) == 0.5
    assert pp.exact_stress(0.75) == 1.0
    assert pp.displacement("two_phase", 0.75, 1.0) == pytest.approx(1.5)
    for v in ("linear", "two_phase", "frozen"):
        assert pp.verify_weak_solution(v, 200, alpha=1.0)["max_violation"] <= 1e-10


def test_simulate_bar_matches_oracle():
    r = pp.simulate(overrides={"mesh.dim": 1, "mesh.nx": 4, "mesh.dirichlet": "left,right", "material.yield": "uniaxial",
                               "material.sigma_y": 1, "material.lame_lambda": 0, "material.lame_mu": 0.5,
                               "loading.kind": "bar", "loading.amplitude": 2, "time.N": 200})
    t = r["t"]
    exact = np.minimum(2 * t, 1)
    assert r["sigma"].shape == (201, 4, 1)
    assert np.max(np.abs(r["sigma"][:, :, 0] - exact[:, None])) <= 1.5 / 200


def test_simulate_2d_diagnostics():
    r = pp.simulate(SCENARIOS / "tension.ini", {"time.N": 20})
    assert r["max_trace_z"] <= 1e-12
    assert r["max_stress_excess"] <= 1e-12
    assert r["sigma_dot_l2"] <= 1.05 * r["apriori_rhs"]


def test_bad_config():
    with pytest.raises(pp.ConfigError):
        pp.simulate(overrides={"mesh.colour": "red"})
    with pytest.raises(pp.ConfigError):
        pp.simulate(overrides={"solver.scheme": "explicit"})


def test_rate_study():
    r = pp.rate_study(lambdas=[1e-1, 1e-2, 1e-3], N=500)
    assert r["order"] >= 0.45
    assert np.all(r["gap"] <= r["bound"])


def test_control_gradient_and_optimize():
    cp = pp.ControlProblem(overrides={"mesh.nx": 3, "mesh.ny": 3, "time.N": 4, "loading.kind": "bending",
                                      "loading.amplitude": 0.6, "optimize.lambdas": [1e-2]})
    x = cp.x0()
    assert x.shape == (cp.num_free,)
    J, g = cp.gradient(x)
    assert J == pytest.approx(cp.objective(x)["J"])
    rng = np.random.default_rng(0)
    d = rng.standard_normal(x.size)
    h = 1e-6 * max(1.0, np.linalg.norm(x)) / np.linalg.norm(d)
    fd = (cp.objective(x + h * d)["J"] - cp.objective(x - h * d)["J"]) / (2 * h)
    assert abs(fd - g @ d) <= 1e-5 * max(abs(fd), 1e-12)

    r = cp.optimize(max_iterations=20)
    assert r["J"] <= J
    assert np.all(np.diff(r["history"]) < 0)


def test_run_modes(tmp_path):
    assert pp.run(SCENARIOS / "oracle.ini", tmp_path / "oracle") == 0
    rows = (tmp_path / "oracle" / "stress.csv").read_text().splitlines()
    assert rows[0] == "t,sigma,sigma_rate"
    assert any(r.startswith("0.75,1,") for r in rows)
    assert (tmp_path / "oracle" / "manifest.txt").exists()
    assert pp.run(SCENARIOS / "tension.ini", tmp_path / "bad", mode="nope") == 2


def test_schema():
    keys = {k for k, _, _ in pp.config_schema()}
    assert {"solver.lambda", "optimize.theta", "sweep.values"} <= keys
