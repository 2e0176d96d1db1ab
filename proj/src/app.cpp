#include "perfplast/app.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "perfplast/analytic_1d.hpp"
#include "perfplast/io.hpp"
#include "perfplast/studies.hpp"

namespace perfplast {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kModes{"simulate", "optimize", "rate-study", "oracle-1d", "sweep"};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

Scheme parse_scheme(const std::string& s, const char* key) {
    if (s == "implicit") return Scheme::ImplicitEuler;
    if (s == "explicit") return Scheme::ExplicitEuler;
    throw ConfigError(std::string(key) + " must be implicit or explicit, got '" + s + "'");
}

std::vector<std::string> split_values(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
    }
    return out;
}

std::string padded(int i, int width) {
    std::string s = std::to_string(i);
    return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

bool verbose(const Config& c) { return c.get_int("run.verbosity") > 0; }

void finish(const Config& c, const fs::path& out) {
    std::ofstream(out / "config.ini", std::ios::binary) << c.dump();
    io::write_manifest(out);
}

// ---------------------------------------------------------------- simulate

void run_simulate(const Config& c, const fs::path& out) {
    const Scenario sc = scenario_from_config(c);
    const Mesh m = sc.build_mesh();
    const TimeGrid grid(sc.T, c.get_int("time.N"));
    const SolverConfig cfg = solver_config_from(c);
    PlasticitySolver solver(m, sc.material, cfg);
    const auto uD = sc.dirichlet_path(m, grid);
    const std::vector<LoadVector> ell(grid.N + 1, zero_field_p1(m));
    const Trajectory tr = run_trajectory(solver, grid, uD, ell, sc.initial_state(m));
    const auto& dg = tr.diag;

    fs::create_directories(out / "diag");
    io::write_mesh(out / "mesh.txt", m);
    {
        io::CsvWriter all(out / "diagnostics.csv", {"k", "t", "sigma_dot", "energy", "dissipation"});
        io::CsvWriter sd(out / "diag" / "sigma_dot.csv", {"t", "value"});
        io::CsvWriter en(out / "diag" / "energy.csv", {"t", "value"});
        io::CsvWriter ds(out / "diag" / "dissipation.csv", {"t", "value"});
        for (int k = 0; k <= grid.N; ++k) {
            const double t = grid.t(k);
            const double s = k > 0 ? std::sqrt(dg.sigma_dot_sq[k]) : 0.0;
            const double d = k > 0 ? dg.dissipation[k] : 0.0;
            all.row({static_cast<double>(k), t, s, dg.energy[k], d});
            sd.row({t, s});
            en.row({t, dg.energy[k]});
            ds.row({t, d});
        }
    }
    const auto snaps = c.get_real_list("output.snapshots");
    if (!snaps.empty()) fs::create_directories(out / "fields");
    for (double ts : snaps) {
        const int k = static_cast<int>(std::lround(ts / grid.dt()));
        const std::string tag = "k" + padded(k, 5);
        io::write_field_p1(out / "fields" / ("u_" + tag + ".csv"), m.dim(), tr.states[k].u);
        io::write_field_p0(out / "fields" / ("sigma_" + tag + ".csv"), m.dim(), tr.states[k].sigma);
        io::write_field_p0(out / "fields" / ("z_" + tag + ".csv"), m.dim(), tr.states[k].z);
    }

    const double uD_norm = h1h1_norm(m, uD, grid);
    io::Summary s;
    s.set("mode", "simulate");
    s.set("scenario", sc.name);
    s.set("scheme", c.get_string("solver.scheme"));
    s.set("lambda", cfg.rp.lambda);
    s.set("huber_eps", cfg.rp.huber_eps);
    s.set("T", grid.T);
    s.set("N", grid.N);
    s.set("dt", grid.dt());
    s.set("dim", m.dim());
    s.set("nodes", m.num_nodes());
    s.set("cells", m.num_cells());
    s.set("sigma_dot_l2", dg.sigma_dot_l2);
    s.set("apriori_rhs", uD_norm / sc.material.elasticity.coercivity_A(m.dim()));
    s.set("w1p_sup", dg.w1p_sup);
    s.set("w1p_exponent", dg.w1p_exponent);
    s.set("max_trace_z", dg.max_trace_z);
    s.set("min_dissipation", dg.min_dissipation);
    s.set("max_stress_excess", dg.max_stress_excess);
    s.set("total_substeps", dg.total_substeps);
    s.set("max_iterations", dg.max_iterations);
    s.set("warnings", static_cast<int>(dg.warnings.size()));
    s.write(out / "summary.txt");
    for (const auto& w : dg.warnings) std::cerr << "warning: " << w << "\n";
    if (verbose(c)) {
        std::cout << "simulate " << sc.name << ": N=" << grid.N << " sigma_dot_l2=" << io::format_double(dg.sigma_dot_l2)
                  << " max_trace_z=" << io::format_double(dg.max_trace_z) << "\n";
    }
}

// ---------------------------------------------------------------- optimize

}  // namespace

ObjectiveSpec objective_from_config(const Config& c, const Scenario& sc, const Mesh& m, const TimeGrid& grid) {
    ObjectiveSpec spec;
    const std::string targets = c.get_string("optimize.targets");
    if (targets == "truth") {
        PlasticitySolver truth(m, sc.material, SolverConfig{});
        const Trajectory tr = run_trajectory(truth, grid, sc.dirichlet_path(m, grid),
                                             std::vector<LoadVector>(grid.N + 1, zero_field_p1(m)), sc.initial_state(m));
        targets_from_states(m, tr.states, grid.dt(), spec);
    } else if (targets == "files") {
        spec.mu_target = io::read_series_p0(c.get_path("optimize.mu_target_file"), m.dim(), grid.N + 1, m.num_cells());
        spec.v_target = io::read_series_p1(c.get_path("optimize.v_target_file"), m.dim(), grid.N + 1, m.num_nodes());
    } else {
        spec.mu_target.assign(grid.N + 1, zero_field_p0(m));
        spec.v_target.assign(grid.N + 1, zero_field_p1(m));
    }
    spec.alpha = c.get_real("optimize.alpha");
    spec.theta = c.get_real("optimize.theta");
    spec.load_rate_weight = c.get_real("optimize.load_rate_weight");
    spec.huber_eps_obj = c.get_real("optimize.huber_eps_obj");
    spec.strain_weight = c.get_real("optimize.strain_weight");
    spec.velocity_weight = c.get_real("optimize.velocity_weight");
    spec.R_monitor = c.get_real("optimize.R_monitor");
    spec.rp = {c.get_real_list("optimize.lambdas").front(), c.get_real("optimize.flow_huber_eps")};
    return spec;
}

namespace {

void run_optimize(const Config& c, const fs::path& out) {
    const Scenario sc = scenario_from_config(c);
    const Mesh m = sc.build_mesh();
    const TimeGrid grid(sc.T, c.get_int("time.N"));
    const State init = sc.initial_state(m);
    const ObjectiveSpec spec = objective_from_config(c, sc, m, grid);
    const auto lambdas = c.get_real_list("optimize.lambdas");
    OptimizerOptions opts;
    opts.max_iterations = c.get_int("optimize.max_iterations");
    opts.max_evaluations = c.get_int("optimize.max_evaluations");
    opts.gradient_tol = c.get_real("optimize.gradient_tol");
    opts.memory = c.get_int("optimize.memory");
    const ControlParam cp0 = ControlParam::from_dirichlet(m, grid, [&](double t) {
        return interpolate_p1(m, [&](const std::array<double, 2>& x) { return sc.dirichlet_value(t, x); });
    });

    fs::create_directories(out);
    io::write_mesh(out / "mesh.txt", m);
    io::Summary s;
    s.set("mode", "optimize");
    s.set("scenario", sc.name);
    s.set("N", grid.N);
    s.set("lambdas", static_cast<int>(lambdas.size()));
    s.set("theta", spec.theta);
    s.set("alpha", spec.alpha);
    s.set("targets", c.get_string("optimize.targets"));

    const int probes = c.get_int("optimize.gradient_probes");
    if (probes > 0) {
        ControlProblem p(m, sc.material, grid, init, spec);
        const auto res = probe_gradient(p, cp0, probes, static_cast<std::uint64_t>(c.get_int("run.seed")));
        io::CsvWriter w(out / "gradient_check.csv", {"direction", "fd", "adjoint", "rel_error"});
        double worst = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) {
            w.row({static_cast<double>(i), res[i].fd, res[i].adjoint, res[i].rel_error});
            worst = std::max(worst, res[i].rel_error);
        }
        s.set("gradient_check_max_rel_error", worst);
    }

    const auto steps = lambda_continuation(m, sc.material, grid, init, spec, lambdas, cp0, opts);
    io::CsvWriter table(out / "continuation.csv",
                        {"lambda", "J", "strain_tracking", "velocity_tracking", "tikhonov", "load", "load_rate",
                         "load_norm", "sigma_dot_l2", "r_monitor", "control_drift", "iterations", "evaluations",
                         "grad_norm", "converged", "ok"});
    int failures = 0;
    double r_max = 0.0;
    std::string first_error;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& st = steps[i];
        const fs::path dir = out / ("lambda_" + padded(static_cast<int>(i), 2));
        fs::create_directories(dir);
        const auto& rep = st.report;
        table.row({st.lambda, st.J, st.terms.strain_tracking, st.terms.velocity_tracking, st.terms.tikhonov,
                   st.terms.load, st.terms.load_rate, st.load_norm, st.sigma_dot_l2, st.r_monitor, st.control_drift,
                   static_cast<double>(rep.iterations.empty() ? 0 : rep.iterations.back().iteration),
                   static_cast<double>(rep.evaluations), rep.grad_norm, rep.converged ? 1.0 : 0.0, st.ok ? 1.0 : 0.0});
        io::Summary ls;
        ls.set("lambda", st.lambda);
        ls.set("ok", st.ok);
        if (!st.ok) {
            ++failures;
            if (first_error.empty()) first_error = st.error;
            ls.set("error", st.error);
            ls.write(dir / "summary.txt");
            continue;
        }
        {
            io::CsvWriter it(dir / "iterations.csv", {"iteration", "J", "grad_norm", "line_search_steps", "step"});
            for (const auto& r : rep.iterations) {
                it.row({static_cast<double>(r.iteration), r.J, r.grad_norm, static_cast<double>(r.line_search_steps), r.step});
            }
        }
        io::write_series_p1(dir / "uD.csv", m.dim(), rep.controls.uD);
        io::write_series_p1(dir / "ell.csv", m.dim(), rep.controls.ell);
        ls.set("J", st.J);
        ls.set("load_norm", st.load_norm);
        ls.set("status", rep.status);
        ls.set("r_monitor", st.r_monitor);
        ls.write(dir / "summary.txt");
        r_max = std::max(r_max, st.r_monitor);
        if (st.r_monitor > spec.R_monitor) {
            std::cerr << "warning: lambda " << st.lambda << " exceeds the stress regularity budget ("
                      << st.r_monitor << " > " << spec.R_monitor << ")\n";
        }
    }
    s.set("failures", failures);
    s.set("r_monitor_max", r_max);
    s.set("R_monitor", spec.R_monitor);
    s.set("r_monitor_ok", r_max <= spec.R_monitor);
    if (failures < static_cast<int>(steps.size())) {
        const auto& last = steps.back().ok ? steps.back() : steps.front();
        s.set("final_J", last.J);
        s.set("final_load_norm", last.load_norm);
    }
    s.write(out / "summary.txt");
    if (verbose(c)) {
        for (const auto& st : steps) {
            std::cout << "lambda=" << io::format_double(st.lambda) << " J=" << io::format_double(st.J)
                      << " |ell|=" << io::format_double(st.load_norm) << " " << (st.ok ? st.report.status : st.error)
                      << "\n";
        }
    }
    if (failures == static_cast<int>(steps.size())) throw SolverError("every lambda failed: " + first_error);
}

// ---------------------------------------------------------------- rate study

void run_rate_study(const Config& c, const fs::path& out) {
    RateStudyOptions o;
    o.lambdas = c.get_real_list("rate_study.lambdas");
    o.N = c.get_int("rate_study.N");
    o.cells = c.get_int("rate_study.cells");
    o.w = c.get_real("rate_study.w");
    o.scheme = parse_scheme(c.get_string("rate_study.scheme"), "rate_study.scheme");
    const RateStudyResult r = rate_study(o);

    fs::create_directories(out);
    bool within = true;
    {
        io::CsvWriter w(out / "rate_study.csv", {"lambda", "sqrt_lambda", "gap", "bound", "within_bound"});
        for (const auto& row : r.rows) {
            within = within && row.gap <= row.bound;
            w.row({row.lambda, std::sqrt(row.lambda), row.gap, row.bound, row.gap <= row.bound ? 1.0 : 0.0});
        }
    }
    io::Summary s;
    s.set("mode", "rate-study");
    s.set("N", o.N);
    s.set("cells", o.cells);
    s.set("w", o.w);
    s.set("scheme", c.get_string("rate_study.scheme"));
    s.set("norm_C", r.norm_C);
    s.set("gamma_C", r.gamma_C);
    s.set("residual_sq", r.residual_sq);
    s.set("order", r.order);
    s.set("order_ok", r.order >= 0.45);
    s.set("all_within_bound", within);
    s.write(out / "summary.txt");
    if (verbose(c)) std::cout << "rate-study: fitted order in sqrt(lambda) " << io::format_double(r.order) << "\n";
}

// ---------------------------------------------------------------- oracle

void run_oracle(const Config& c, const fs::path& out) {
    const int res = c.get_int("oracle.resolution");
    fs::create_directories(out);
    {
        io::CsvWriter w(out / "stress.csv", {"t", "sigma", "sigma_rate"});
        for (int i = 0; i <= res; ++i) {
            const double t = static_cast<double>(i) / res;
            w.row({t, oned::exact_stress(t), oned::exact_stress_rate(t)});
        }
    }
    const double alpha = c.get_real("oracle.alpha"), beta = c.get_real("oracle.beta");
    const std::vector<std::pair<std::string, oned::Variant>> variants{
        {"linear", oned::Variant::linear()},
        {"two_phase", oned::Variant::two_phase(beta)},
        {"frozen", oned::Variant::frozen(alpha, beta)},
    };
    io::Summary s;
    s.set("mode", "oracle-1d");
    s.set("resolution", res);
    s.set("alpha", alpha);
    s.set("beta", beta);
    double worst = 0.0;
    for (const auto& [slug, v] : variants) {
        io::CsvWriter w(out / ("displacement_" + slug + ".csv"), {"t", "x", "u", "u_x"});
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            for (int j = 0; j <= res; ++j) {
                const double x = static_cast<double>(j) / res;
                w.row({t, x, oned::displacement(v, t, x), oned::displacement_gradient(v, t, x)});
            }
        }
        const auto rep = oned::verify_weak_solution(v, res);
        s.set(slug + ".variant", v.name());
        s.set(slug + ".max_violation", rep.max_violation());
        s.set(slug + ".points_checked", rep.points_checked);
        s.set(slug + ".points_excluded", rep.points_excluded);
        worst = std::max(worst, rep.max_violation());
    }
    s.set("max_violation", worst);
    s.write(out / "summary.txt");
    if (verbose(c)) std::cout << "oracle-1d: max weak-form violation " << io::format_double(worst) << "\n";
}

// ---------------------------------------------------------------- sweep

void run_sweep(const Config& c, const fs::path& out) {
    const std::string param = c.get_string("sweep.parameter");
    const std::string sub = c.get_string("sweep.mode");
    const auto values = split_values(c.get_string("sweep.values"));
    const int threads = std::max(1, c.get_int("run.threads"));

    struct Outcome {
        std::string status = "ok";
        std::string message;
    };
    std::vector<Outcome> outcomes(values.size());
    std::vector<Config> configs;
    for (const auto& v : values) {
        Config ci = c;
        ci.set(param, v);
        ci.set("run.mode", sub);
        ci.set("run.verbosity", "0");
        configs.push_back(ci);
    }
    const int width = static_cast<int>(std::to_string(values.size()).size());
    auto dir_of = [&](std::size_t i) { return out / ("run_" + padded(static_cast<int>(i), width)); };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            try {
                run_mode(configs[i], sub, dir_of(i));
            } catch (const ConfigError& e) {
                outcomes[i] = {"config_error", e.what()};
            } catch (const std::invalid_argument& e) {
                outcomes[i] = {"config_error", e.what()};
            } catch (const std::exception& e) {
                outcomes[i] = {"solver_error", e.what()};
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min<int>(threads, static_cast<int>(values.size())); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    const std::vector<std::string> keys = sub == "simulate"     ? std::vector<std::string>{"sigma_dot_l2", "max_trace_z"}
                                          : sub == "optimize"   ? std::vector<std::string>{"final_J", "final_load_norm"}
                                          : sub == "rate-study" ? std::vector<std::string>{"order"}
                                                                : std::vector<std::string>{"max_violation"};
    std::vector<std::string> header{"index", "value", "status"};
    header.insert(header.end(), keys.begin(), keys.end());
    io::CsvWriter table(out / "sweep.csv", header);
    io::Summary s;
    s.set("mode", "sweep");
    s.set("parameter", param);
    s.set("sub_mode", sub);
    s.set("runs", static_cast<int>(values.size()));
    int failed = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), values[i], outcomes[i].status};
        io::Summary rs;
        if (outcomes[i].status == "ok") rs = io::Summary::read(dir_of(i) / "summary.txt");
        for (const auto& k : keys) {
            std::string v;
            for (const auto& [kk, vv] : rs.entries()) {
                if (kk == k) v = vv;
            }
            row.push_back(v);
        }
        table.row_text(row);
        if (outcomes[i].status != "ok") {
            ++failed;
            s.set("run_" + padded(static_cast<int>(i), width) + ".error", outcomes[i].message);
        }
    }
    s.set("failed", failed);
    s.write(out / "summary.txt");
    if (verbose(c)) std::cout << "sweep: " << values.size() - failed << "/" << values.size() << " runs ok\n";
    if (failed > 0) throw SolverError(std::to_string(failed) + " sweep run(s) failed");
}

void error_record(int code, const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", kind}, {"exit_code", code}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

}  // namespace

Scenario scenario_from_config(const Config& c) {
    Scenario s;
    s.dim = c.get_int("mesh.dim");
    require(s.dim == 1 || s.dim == 2, "mesh.dim must be 1 or 2");
    s.nx = c.get_int("mesh.nx");
    s.ny = s.dim == 2 ? c.get_int("mesh.ny") : 1;
    require(s.nx >= 1 && s.ny >= 1, "mesh.nx and mesh.ny must be at least 1");
    try {
        s.dirichlet = DirichletSpec::parse(c.get_string("mesh.dirichlet"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("mesh.dirichlet: ") + e.what());
    }
    if (s.dim == 1) require((s.dirichlet.sides & (kBottom | kTop)) == 0u, "mesh.dirichlet: dim 1 only has left,right");

    const double lam = c.get_real("material.lame_lambda"), mu = c.get_real("material.lame_mu");
    require(mu > 0.0 && lam >= 0.0, "material: need lame_mu > 0 and lame_lambda >= 0");
    const double sy = c.get_real("material.sigma_y");
    require(sy > 0.0, "material.sigma_y must be positive");
    const std::string y = c.get_string("material.yield");
    if (y == "von_mises") s.material.yield = YieldSet::von_mises(sy);
    else if (y == "uniaxial") s.material.yield = YieldSet::uniaxial(sy);
    else throw ConfigError("material.yield must be von_mises or uniaxial, got '" + y + "'");
    require(y != "uniaxial" || s.dim == 1, "material.yield = uniaxial needs mesh.dim = 1");
    s.material.elasticity = ElasticityTensor(lam, mu);

    try {
        s.loading = parse_loading(c.get_string("loading.kind"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("loading.kind: ") + e.what());
    }
    s.name = to_string(s.loading);
    s.amplitude = c.get_real("loading.amplitude");
    require(std::isfinite(s.amplitude), "loading.amplitude must be finite");
    s.T = c.get_real("time.T");
    require(s.T > 0.0, "time.T must be positive");
    require(c.get_int("time.N") >= 1, "time.N must be at least 1");
    return s;
}

SolverConfig solver_config_from(const Config& c) {
    SolverConfig cfg;
    cfg.scheme = parse_scheme(c.get_string("solver.scheme"), "solver.scheme");
    cfg.rp = {c.get_real("solver.lambda"), c.get_real("solver.huber_eps")};
    require(cfg.rp.lambda >= 0.0, "solver.lambda must be >= 0");
    require(cfg.scheme == Scheme::ImplicitEuler || cfg.rp.lambda > 0.0, "explicit scheme needs solver.lambda > 0");
    require(cfg.rp.huber_eps >= 0.0, "solver.huber_eps must be >= 0");
    cfg.smoothed = cfg.rp.huber_eps > 0.0;
    if (cfg.smoothed) {
        require(cfg.rp.lambda > 0.0, "solver.huber_eps > 0 needs solver.lambda > 0");
        require(cfg.rp.huber_eps < c.get_real("material.sigma_y"), "solver.huber_eps must be below material.sigma_y");
    }
    cfg.newton_tol = c.get_real("solver.tol");
    cfg.newton_maxit = c.get_int("solver.max_iterations");
    require(cfg.newton_tol > 0.0 && cfg.newton_maxit >= 1, "solver.tol > 0 and solver.max_iterations >= 1 required");
    cfg.auto_substep = c.get_bool("solver.auto_substep");
    return cfg;
}

void validate_config(const Config& c, const std::string& mode) {
    require(std::find(kModes.begin(), kModes.end(), mode) != kModes.end(), "unknown mode '" + mode + "'");
    require(c.get_int("run.threads") >= 1, "run.threads must be at least 1");
    require(c.get_int("run.verbosity") >= 0, "run.verbosity must be >= 0");
    if (mode == "simulate") {
        const Scenario sc = scenario_from_config(c);
        solver_config_from(c);
        const double T = sc.T;
        for (double t : c.get_real_list("output.snapshots")) require(t >= 0.0 && t <= T, "output.snapshots must lie in [0, T]");
    } else if (mode == "optimize") {
        const Scenario sc = scenario_from_config(c);
        const auto l = c.get_real_list("optimize.lambdas");
        require(!l.empty(), "optimize.lambdas is empty");
        for (std::size_t i = 0; i < l.size(); ++i) {
            require(l[i] > 0.0, "optimize.lambdas must be positive");
            require(i == 0 || l[i] < l[i - 1], "optimize.lambdas must be strictly decreasing");
        }
        const double th = c.get_real("optimize.theta");
        require(th > 0.0 && th < 1.0, "optimize.theta must lie in (0, 1)");
        require(c.get_real("optimize.alpha") > 0.0, "optimize.alpha must be positive");
        require(c.get_real("optimize.huber_eps_obj") > 0.0, "optimize.huber_eps_obj must be positive");
        const double fe = c.get_real("optimize.flow_huber_eps");
        require(fe > 0.0 && fe < sc.material.yield.sigma_y, "optimize.flow_huber_eps must lie in (0, sigma_y)");
        require(c.get_real("optimize.load_rate_weight") >= 0.0, "optimize.load_rate_weight must be >= 0");
        require(c.get_real("optimize.strain_weight") >= 0.0 && c.get_real("optimize.velocity_weight") >= 0.0,
                "optimize tracking weights must be >= 0");
        require(c.get_real("optimize.R_monitor") > 0.0, "optimize.R_monitor must be positive");
        require(c.get_int("optimize.max_iterations") >= 0 && c.get_int("optimize.max_evaluations") >= 1,
                "optimize budgets must be non-negative");
        require(c.get_int("optimize.memory") >= 1, "optimize.memory must be at least 1");
        require(c.get_int("optimize.gradient_probes") >= 0, "optimize.gradient_probes must be >= 0");
        const std::string t = c.get_string("optimize.targets");
        require(t == "truth" || t == "files" || t == "zero", "optimize.targets must be truth, files or zero");
        if (t == "files") {
            for (const char* k : {"optimize.mu_target_file", "optimize.v_target_file"}) {
                require(!c.get_string(k).empty(), std::string(k) + " is required when targets = files");
                require(fs::exists(c.get_path(k)), std::string(k) + ": no such file " + c.get_path(k).string());
            }
        }
    } else if (mode == "rate-study") {
        const auto l = c.get_real_list("rate_study.lambdas");
        require(l.size() >= 2, "rate_study.lambdas needs at least two values");
        for (double x : l) require(x > 0.0, "rate_study.lambdas must be positive");
        require(c.get_int("rate_study.N") >= 1 && c.get_int("rate_study.cells") >= 1, "rate_study.N and cells must be >= 1");
        parse_scheme(c.get_string("rate_study.scheme"), "rate_study.scheme");
    } else if (mode == "oracle-1d") {
        require(c.get_int("oracle.resolution") >= 1, "oracle.resolution must be >= 1");
        const double a = c.get_real("oracle.alpha"), b = c.get_real("oracle.beta");
        require(a >= 0.0 && a <= 2.0, "oracle.alpha must lie in [0, 2]");
        require(b >= 0.0 && b <= 1.0, "oracle.beta must lie in [0, 1]");
    } else if (mode == "sweep") {
        const std::string param = c.get_string("sweep.parameter");
        require(!param.empty(), "sweep.parameter is required");
        require(param.rfind("run.", 0) != 0 && param.rfind("sweep.", 0) != 0, "sweep.parameter cannot be a run or sweep key");
        const auto values = split_values(c.get_string("sweep.values"));
        require(!values.empty(), "sweep.values is required");
        const std::string sub = c.get_string("sweep.mode");
        require(sub != "sweep", "sweep.mode cannot be sweep");
        for (const auto& v : values) {
            Config ci = c;
            ci.set(param, v);
            validate_config(ci, sub);
        }
    }
}

void run_mode(const Config& c, const std::string& mode, const fs::path& out) {
    fs::create_directories(out);
    if (mode == "simulate") run_simulate(c, out);
    else if (mode == "optimize") run_optimize(c, out);
    else if (mode == "rate-study") run_rate_study(c, out);
    else if (mode == "oracle-1d") run_oracle(c, out);
    else if (mode == "sweep") run_sweep(c, out);
    else throw ConfigError("unknown mode '" + mode + "'");
    finish(c, out);
}

int run(const RunOptions& opts) {
    try {
        Config c = opts.config_path.empty() ? Config() : Config::load(opts.config_path);
        if (opts.mode) c.set("run.mode", *opts.mode);
        if (opts.seed) c.set("run.seed", std::to_string(*opts.seed));
        if (opts.threads) c.set("run.threads", std::to_string(*opts.threads));

        if (opts.self_test) {
            const auto results = run_acceptance(static_cast<std::uint64_t>(c.get_int("run.seed")));
            fs::create_directories(opts.out_dir);
            std::ofstream rep(opts.out_dir / "self_test.txt", std::ios::binary);
            bool ok = true;
            for (const auto& r : results) {
                std::cout << format_check(r) << "\n";
                rep << format_check(r) << "\n";
                ok = ok && r.pass;
            }
            rep.close();
            io::write_manifest(opts.out_dir);
            if (!ok) {
                error_record(kExitSelfTest, "self_test", "one or more acceptance checks failed");
                return kExitSelfTest;
            }
            return kExitOk;
        }

        const std::string mode = c.get_string("run.mode");
        require(!mode.empty(), "no mode given (run.mode or --mode)");
        validate_config(c, mode);
        run_mode(c, mode, opts.out_dir);
        return kExitOk;
    } catch (const ConfigError& e) {
        error_record(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const io::FormatError& e) {
        error_record(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        error_record(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const SolverError& e) {
        error_record(kExitSolver, "solver", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        error_record(kExitSolver, "solver", e.what());
        return kExitSolver;
    }
}

}  // namespace perfplast
