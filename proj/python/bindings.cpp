#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <Eigen/Core>

#include "perfplast/analytic_1d.hpp"
#include "perfplast/app.hpp"
#include "perfplast/io.hpp"
#include "perfplast/studies.hpp"

namespace py = pybind11;
using namespace perfplast;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

SymTensor tensor_from(const Array& a) {
    const auto b = a.request();
    if (b.ndim != 2 || b.shape[0] != b.shape[1] || b.shape[0] < 1 || b.shape[0] > 3) {
        throw py::value_error("expected a square 1x1, 2x2 or 3x3 array");
    }
    const int n = static_cast<int>(b.shape[0]);
    const double* p = a.data();
    SymTensor t(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            if (p[i * n + j] != p[j * n + i]) throw py::value_error("tensor must be symmetric");
            t.set(i, j, p[i * n + j]);
        }
    }
    return t;
}

Array array_from(const SymTensor& t) {
    const int n = t.dim();
    Array out({n, n});
    auto r = out.mutable_unchecked<2>();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = t(i, j);
    return out;
}

YieldSet yield_set(const std::string& kind, double sigma_y) {
    if (kind == "von_mises") return YieldSet::von_mises(sigma_y);
    if (kind == "uniaxial") return YieldSet::uniaxial(sigma_y);
    throw py::value_error("kind must be von_mises or uniaxial");
}

Config config_from(const std::optional<std::filesystem::path>& path, const py::dict& overrides) {
    Config c = path ? Config::load(*path) : Config();
    for (const auto& [k, v] : overrides) {
        std::string value;
        if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
        else if (py::isinstance<py::float_>(v)) value = io::format_double(v.cast<double>());
        else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
            for (const auto& item : v) {
                if (!value.empty()) value += ",";
                value += io::format_double(item.cast<double>());
            }
        } else value = py::str(v);
        c.set(py::str(k), value);
    }
    return c;
}

Array p0_history(const std::vector<State>& states, FieldP0 State::*field) {
    const py::ssize_t steps = static_cast<py::ssize_t>(states.size());
    const py::ssize_t cells = static_cast<py::ssize_t>((states.front().*field).size());
    const py::ssize_t comps = cells ? (states.front().*field)[0].size() : 0;
    Array out({steps, cells, comps});
    auto r = out.mutable_unchecked<3>();
    for (py::ssize_t k = 0; k < steps; ++k)
        for (py::ssize_t c = 0; c < cells; ++c)
            for (py::ssize_t i = 0; i < comps; ++i) r(k, c, i) = (states[k].*field)[c][static_cast<int>(i)];
    return out;
}

Array vec(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

py::dict simulate(const std::optional<std::filesystem::path>& config, const py::dict& overrides) {
    const Config c = config_from(config, overrides);
    validate_config(c, "simulate");
    const Scenario sc = scenario_from_config(c);
    const Mesh m = sc.build_mesh();
    const TimeGrid grid(sc.T, c.get_int("time.N"));
    Trajectory tr;
    {
        py::gil_scoped_release release;
        const PlasticitySolver solver(m, sc.material, solver_config_from(c));
        const std::vector<LoadVector> ell(grid.N + 1, zero_field_p1(m));
        tr = run_trajectory(solver, grid, sc.dirichlet_path(m, grid), ell, sc.initial_state(m));
    }
    std::vector<double> t(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) t[k] = grid.t(k);
    Array u({static_cast<py::ssize_t>(grid.N + 1), static_cast<py::ssize_t>(m.num_dofs())});
    auto ur = u.mutable_unchecked<2>();
    for (int k = 0; k <= grid.N; ++k)
        for (int i = 0; i < m.num_dofs(); ++i) ur(k, i) = tr.states[k].u[i];
    Array nodes({static_cast<py::ssize_t>(m.num_nodes()), static_cast<py::ssize_t>(m.dim())});
    auto nr = nodes.mutable_unchecked<2>();
    for (int a = 0; a < m.num_nodes(); ++a)
        for (int i = 0; i < m.dim(); ++i) nr(a, i) = m.node(a)[i];

    py::dict d;
    d["t"] = vec(t);
    d["nodes"] = nodes;
    d["u"] = u;
    d["sigma"] = p0_history(tr.states, &State::sigma);
    d["z"] = p0_history(tr.states, &State::z);
    d["energy"] = vec(tr.diag.energy);
    d["dissipation"] = vec(tr.diag.dissipation);
    d["sigma_dot_l2"] = tr.diag.sigma_dot_l2;
    d["w1p_sup"] = tr.diag.w1p_sup;
    d["max_trace_z"] = tr.diag.max_trace_z;
    d["min_dissipation"] = tr.diag.min_dissipation;
    d["max_stress_excess"] = tr.diag.max_stress_excess;
    d["apriori_rhs"] = h1h1_norm(m, sc.dirichlet_path(m, grid), grid) / sc.material.elasticity.coercivity_A(m.dim());
    return d;
}

// Control problem of the optimize mode over packed free coefficients.
class PyControl {
public:
    PyControl(const std::optional<std::filesystem::path>& config, const py::dict& overrides)
        : cfg_(config_from(config, overrides)) {
        validate_config(cfg_, "optimize");
        sc_ = scenario_from_config(cfg_);
        mesh_ = sc_.build_mesh();
        grid_ = TimeGrid(sc_.T, cfg_.get_int("time.N"));
        problem_ = std::make_unique<ControlProblem>(mesh_, sc_.material, grid_, sc_.initial_state(mesh_),
                                                    objective_from_config(cfg_, sc_, mesh_, grid_));
        base_ = ControlParam::from_dirichlet(mesh_, grid_, [&](double t) {
            return interpolate_p1(mesh_, [&](const std::array<double, 2>& x) { return sc_.dirichlet_value(t, x); });
        });
    }

    int num_free() const { return problem_->num_free(); }
    Eigen::VectorXd x0() const { return problem_->pack(base_); }

    py::dict objective(const Eigen::VectorXd& x) const {
        const ObjectiveEvaluation ev = eval(x);
        py::dict d;
        d["J"] = ev.J;
        d["strain_tracking"] = ev.terms.strain_tracking;
        d["velocity_tracking"] = ev.terms.velocity_tracking;
        d["tikhonov"] = ev.terms.tikhonov;
        d["load"] = ev.terms.load;
        d["load_rate"] = ev.terms.load_rate;
        d["load_norm"] = ev.load_norm;
        d["sigma_dot_l2"] = ev.sigma_dot_l2;
        d["r_monitor"] = ev.r_monitor;
        d["max_trace_z"] = ev.max_trace_z;
        return d;
    }

    std::pair<double, Eigen::VectorXd> gradient(const Eigen::VectorXd& x) const {
        check(x);
        ControlParam g;
        double J;
        {
            py::gil_scoped_release release;
            J = problem_->gradient(problem_->unpack(x, base_), g);
        }
        return {J, problem_->pack(g)};
    }

    py::dict optimize(const std::optional<Eigen::VectorXd>& x, int max_iterations, double gradient_tol) const {
        OptimizerOptions o;
        o.max_iterations = max_iterations;
        o.gradient_tol = gradient_tol;
        const ControlParam start = x ? (check(*x), problem_->unpack(*x, base_)) : base_;
        OptReport r;
        {
            py::gil_scoped_release release;
            r = perfplast::optimize(*problem_, start, o);
        }
        std::vector<double> J;
        for (const auto& it : r.iterations) J.push_back(it.J);
        py::dict d;
        d["x"] = problem_->pack(r.controls);
        d["J"] = r.J;
        d["grad_norm"] = r.grad_norm;
        d["history"] = vec(J);
        d["evaluations"] = r.evaluations;
        d["converged"] = r.converged;
        d["status"] = r.status;
        return d;
    }

private:
    void check(const Eigen::VectorXd& x) const {
        if (x.size() != problem_->num_free()) throw py::value_error("x has the wrong length");
    }
    ObjectiveEvaluation eval(const Eigen::VectorXd& x) const {
        check(x);
        py::gil_scoped_release release;
        return problem_->evaluate(problem_->unpack(x, base_));
    }

    Config cfg_;
    Scenario sc_;
    Mesh mesh_;
    TimeGrid grid_;
    std::unique_ptr<ControlProblem> problem_;
    ControlParam base_;
};

oned::Variant variant(const std::string& kind, double alpha, double beta) {
    if (kind == "linear") return oned::Variant::linear();
    if (kind == "two_phase") return oned::Variant::two_phase(beta);
    if (kind == "frozen") return oned::Variant::frozen(alpha, beta);
    throw py::value_error("variant must be linear, two_phase or frozen");
}

}  // namespace

PYBIND11_MODULE(_perfplast, mod) {
    mod.doc() = "Elasto-plastic evolution, Yosida regularization and optimal control";

    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(mod, "SolverError", PyExc_RuntimeError);

    mod.def("deviator", [](const Array& a) { return array_from(deviator(tensor_from(a))); });
    mod.def("project", [](const Array& a, double sigma_y, const std::string& kind) {
        return array_from(project_K(yield_set(kind, sigma_y), tensor_from(a)));
    }, py::arg("tau"), py::arg("sigma_y"), py::arg("kind") = "von_mises");
    mod.def("yosida_value", [](const Array& a, double sigma_y, double lam, const std::string& kind) {
        return yosida_value(yield_set(kind, sigma_y), {lam, 0.0}, tensor_from(a));
    }, py::arg("tau"), py::arg("sigma_y"), py::arg("lam"), py::arg("kind") = "von_mises");
    mod.def("yosida_deriv", [](const Array& a, double sigma_y, double lam, double huber_eps, const std::string& kind) {
        const YieldSet ys = yield_set(kind, sigma_y);
        const SymTensor t = tensor_from(a);
        return array_from(huber_eps > 0.0 ? yosida_deriv_smoothed(ys, {lam, huber_eps}, t)
                                          : yosida_deriv(ys, {lam, 0.0}, t));
    }, py::arg("tau"), py::arg("sigma_y"), py::arg("lam"), py::arg("huber_eps") = 0.0, py::arg("kind") = "von_mises");

    mod.def("exact_stress", &oned::exact_stress, py::arg("t"));
    mod.def("displacement", [](const std::string& kind, double t, double x, double alpha, double beta) {
        return oned::displacement(variant(kind, alpha, beta), t, x);
    }, py::arg("variant"), py::arg("t"), py::arg("x"), py::arg("alpha") = 0.0, py::arg("beta") = 0.5);
    mod.def("verify_weak_solution", [](const std::string& kind, int resolution, double alpha, double beta) {
        const auto r = oned::verify_weak_solution(variant(kind, alpha, beta), resolution);
        py::dict d;
        d["equilibrium"] = r.equilibrium;
        d["admissibility"] = r.admissibility;
        d["flow_rule"] = r.flow_rule;
        d["max_violation"] = r.max_violation();
        d["points_checked"] = r.points_checked;
        d["points_excluded"] = r.points_excluded;
        return d;
    }, py::arg("variant"), py::arg("resolution") = 200, py::arg("alpha") = 0.0, py::arg("beta") = 0.5);

    mod.def("config_schema", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& k : config_schema()) out.emplace_back(k.name, k.default_value, k.doc);
        return out;
    });

    mod.def("simulate", &simulate, py::arg("config") = std::nullopt, py::arg("overrides") = py::dict());

    mod.def("rate_study", [](const std::vector<double>& lambdas, int N, int cells, double w, const std::string& scheme) {
        RateStudyOptions o;
        if (!lambdas.empty()) o.lambdas = lambdas;
        o.N = N;
        o.cells = cells;
        o.w = w;
        if (scheme == "explicit") o.scheme = Scheme::ExplicitEuler;
        else if (scheme != "implicit") throw py::value_error("scheme must be implicit or explicit");
        RateStudyResult r;
        {
            py::gil_scoped_release release;
            r = perfplast::rate_study(o);
        }
        std::vector<double> lam, gap, bound;
        for (const auto& row : r.rows) {
            lam.push_back(row.lambda);
            gap.push_back(row.gap);
            bound.push_back(row.bound);
        }
        py::dict d;
        d["lambda"] = vec(lam);
        d["gap"] = vec(gap);
        d["bound"] = vec(bound);
        d["order"] = r.order;
        return d;
    }, py::arg("lambdas") = std::vector<double>{}, py::arg("N") = 2000, py::arg("cells") = 4, py::arg("w") = 2.0,
       py::arg("scheme") = "implicit");

    py::class_<PyControl>(mod, "ControlProblem")
        .def(py::init<const std::optional<std::filesystem::path>&, const py::dict&>(), py::arg("config") = std::nullopt,
             py::arg("overrides") = py::dict())
        .def_property_readonly("num_free", &PyControl::num_free)
        .def("x0", &PyControl::x0)
        .def("objective", &PyControl::objective, py::arg("x"))
        .def("gradient", &PyControl::gradient, py::arg("x"))
        .def("optimize", &PyControl::optimize, py::arg("x") = std::nullopt, py::arg("max_iterations") = 200,
             py::arg("gradient_tol") = 1e-8);

    mod.def("acceptance", [](std::uint64_t seed, const std::vector<int>& only) {
        std::vector<CheckResult> res;
        {
            py::gil_scoped_release release;
            res = run_acceptance(seed, only);
        }
        std::vector<py::dict> out;
        for (const auto& r : res) {
            py::dict d;
            d["id"] = r.id;
            d["name"] = r.name;
            d["passed"] = r.pass;
            d["detail"] = r.detail;
            d["seconds"] = r.seconds;
            out.push_back(d);
        }
        return out;
    }, py::arg("seed") = 0, py::arg("only") = std::vector<int>{});

    mod.def("run", [](const std::optional<std::filesystem::path>& config, const std::filesystem::path& out,
                      std::optional<std::string> mode, std::optional<int> seed, std::optional<int> threads,
                      bool self_test) {
        RunOptions o;
        if (config) o.config_path = *config;
        o.out_dir = out;
        o.mode = std::move(mode);
        o.seed = seed;
        o.threads = threads;
        o.self_test = self_test;
        py::gil_scoped_release release;
        return run(o);
    }, py::arg("config") = std::nullopt, py::arg("out") = "out", py::arg("mode") = std::nullopt,
       py::arg("seed") = std::nullopt, py::arg("threads") = std::nullopt, py::arg("self_test") = false);
}
