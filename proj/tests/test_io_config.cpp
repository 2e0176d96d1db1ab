#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "perfplast/app.hpp"
#include "perfplast/config.hpp"
#include "perfplast/io.hpp"
#include "perfplast/scenarios.hpp"

using namespace perfplast;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("perfplast_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("shortest round-trip numbers") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::parse_double(io::format_double(std::numeric_limits<double>::denorm_min())) ==
          std::numeric_limits<double>::denorm_min());
    CHECK_THROWS_AS(io::parse_double("1.5x"), io::FormatError);
    CHECK_THROWS_AS(io::parse_double("1,5"), io::FormatError);
}

TEST_CASE("mesh and field files round-trip bit for bit") {
    const fs::path dir = scratch("roundtrip");
    for (const Scenario& sc : {bending_scenario(5), bar_scenario(7)}) {
        const Mesh m = sc.build_mesh();
        io::write_mesh(dir / "mesh.txt", m);
        CHECK(io::read_mesh(dir / "mesh.txt") == m);

        SolverConfig cfg;
        const PlasticitySolver solver(m, sc.material, cfg);
        const TimeGrid grid(1.0, 12);
        const std::vector<LoadVector> ell(13, LoadVector::Zero(m.num_dofs()));
        const Trajectory tr = run_trajectory(solver, grid, sc.dirichlet_path(m, grid), ell, sc.initial_state(m));
        const State& s = tr.states.back();
        io::write_field_p0(dir / "sigma.csv", m.dim(), s.sigma);
        io::write_field_p1(dir / "u.csv", m.dim(), s.u);
        CHECK(io::read_field_p0(dir / "sigma.csv", m.dim()) == s.sigma);
        CHECK(io::read_field_p1(dir / "u.csv", m.dim()) == s.u);

        std::vector<FieldP0> sh;
        std::vector<FieldP1> uh;
        for (const auto& st : tr.states) {
            sh.push_back(st.sigma);
            uh.push_back(st.u);
        }
        io::write_series_p0(dir / "sigma_series.csv", m.dim(), sh);
        io::write_series_p1(dir / "u_series.csv", m.dim(), uh);
        CHECK(io::read_series_p0(dir / "sigma_series.csv", m.dim(), 13, m.num_cells()) == sh);
        CHECK(io::read_series_p1(dir / "u_series.csv", m.dim(), 13, m.num_nodes()) == uh);
        CHECK_THROWS_AS(io::read_series_p1(dir / "u_series.csv", m.dim(), 14, m.num_nodes()), io::FormatError);
    }
    const std::string text = slurp(dir / "u.csv");
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.rfind("node,u0\n", 0) == 0);
}

TEST_CASE("malformed files are rejected") {
    const fs::path dir = scratch("malformed");
    std::ofstream(dir / "bad_mesh.txt") << "perfplast-mesh 2\n";
    CHECK_THROWS_AS(io::read_mesh(dir / "bad_mesh.txt"), io::FormatError);
    std::ofstream(dir / "bad.csv") << "node,u0,u1\n0,1\n";
    CHECK_THROWS_AS(io::read_field_p1(dir / "bad.csv", 2), io::FormatError);
    CHECK_THROWS(io::read_csv(dir / "missing.csv"));
}

TEST_CASE("summary and csv") {
    const fs::path dir = scratch("summary");
    io::Summary s;
    s.set("mode", "simulate");
    s.set("value", 0.125);
    s.set("count", 3);
    s.set("ok", true);
    s.write(dir / "summary.txt");
    const io::Summary r = io::Summary::read(dir / "summary.txt");
    CHECK(r.entries() == s.entries());
    CHECK(r.get("value") == "0.125");
    CHECK_THROWS(r.get("absent"));

    {
        io::CsvWriter w(dir / "t.csv", {"a", "b"});
        w.row({1.0, 0.5});
        CHECK_THROWS(w.row({1.0}));
    }
    const io::CsvTable t = io::read_csv(dir / "t.csv");
    CHECK(t.column("b") == 1);
    CHECK(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "0.5");
}

TEST_CASE("sha256 and manifest") {
    const fs::path dir = scratch("manifest");
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(io::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::create_directories(dir / "sub");
    std::ofstream(dir / "sub" / "x.csv", std::ios::binary) << "k\n1\n";
    io::write_manifest(dir);
    const std::string first = slurp(dir / "manifest.txt");
    io::write_manifest(dir);
    CHECK(slurp(dir / "manifest.txt") == first);
    CHECK(first.find("  3  abc.txt\n") != std::string::npos);
    CHECK(first.find("sub/x.csv") != std::string::npos);
    CHECK(first.find("manifest.txt") == std::string::npos);
}

TEST_CASE("config parsing") {
    const Config c = Config::parse("[mesh]\nnx = 4\n; comment\n[solver]\nlambda = 1e-3\nscheme = explicit\n"
                                   "[optimize]\nlambdas = 1e-1, 1e-2\n");
    CHECK(c.get_int("mesh.nx") == 4);
    CHECK(c.get_real("solver.lambda") == 1e-3);
    CHECK(c.get_string("solver.scheme") == "explicit");
    CHECK(c.get_real_list("optimize.lambdas") == std::vector<double>{1e-1, 1e-2});
    CHECK(c.is_set("mesh.nx"));
    CHECK_FALSE(c.is_set("mesh.ny"));
    CHECK(c.get_int("mesh.ny") == 8);

    CHECK_THROWS_AS(Config::parse("[mesh]\nnx = 4\nwidth = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[meshes]\nnx = 4\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[mesh]\nnx = four\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[solver]\nlambda = 1e-3x\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("nx = 4\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[mesh\nnx = 4\n"), ConfigError);
    CHECK_THROWS_AS(c.get_real("mesh.nx"), ConfigError);

    const Config again = Config::parse(c.dump());
    CHECK(again.dump() == c.dump());

    Config files = Config::parse("[optimize]\nmu_target_file = mu.csv\n", "/data/run");
    CHECK(files.get_path("optimize.mu_target_file") == fs::path("/data/run/mu.csv"));
}

TEST_CASE("config validation") {
    Config c;
    c.set("mesh.nx", "0");
    CHECK_THROWS_AS(validate_config(c, "simulate"), ConfigError);
    Config d;
    d.set("solver.scheme", "explicit");
    CHECK_THROWS_AS(validate_config(d, "simulate"), ConfigError);  // explicit needs lambda > 0
    Config e;
    e.set("optimize.theta", "1");
    CHECK_THROWS_AS(validate_config(e, "optimize"), ConfigError);
    Config f;
    f.set("optimize.lambdas", "1e-2, 1e-1");
    CHECK_THROWS_AS(validate_config(f, "optimize"), ConfigError);
    CHECK_THROWS_AS(validate_config(Config{}, "dance"), ConfigError);
    CHECK_NOTHROW(validate_config(Config{}, "simulate"));
    CHECK_NOTHROW(validate_config(Config{}, "oracle-1d"));
}

TEST_CASE("run maps failures to exit codes") {
    const fs::path dir = scratch("run");
    std::ofstream(dir / "bad.ini") << "[mesh]\nsize = 3\n";
    RunOptions o;
    o.config_path = dir / "bad.ini";
    o.out_dir = dir / "out_bad";
    o.mode = "simulate";
    CHECK(run(o) == kExitConfig);

    std::ofstream(dir / "stiff.ini") << "[mesh]\nnx = 4\nny = 4\n[solver]\nmax_iterations = 1\n[time]\nN = 5\n";
    o.config_path = dir / "stiff.ini";
    o.out_dir = dir / "out_stiff";
    CHECK(run(o) == kExitSolver);

    o.config_path.clear();
    o.mode = "oracle-1d";
    o.out_dir = dir / "oracle";
    CHECK(run(o) == kExitOk);
    const io::CsvTable t = io::read_csv(dir / "oracle" / "stress.csv");
    bool found = false;
    for (const auto& row : t.rows) {
        if (row[t.column("t")] == "0.75") {
            found = true;
            CHECK(io::parse_double(row[t.column("sigma")]) == 1.0);
        }
    }
    CHECK(found);
    CHECK(fs::exists(dir / "oracle" / "manifest.txt"));
}

TEST_CASE("simulate with constant controls has zero stress rate") {
    const fs::path dir = scratch("constant");
    std::ofstream(dir / "c.ini") << "[mesh]\nnx = 4\nny = 4\n[loading]\nkind = constant\namplitude = 0.05\n[time]\nN = 6\n";
    RunOptions o;
    o.config_path = dir / "c.ini";
    o.out_dir = dir / "out";
    o.mode = "simulate";
    REQUIRE(run(o) == kExitOk);
    const io::CsvTable t = io::read_csv(dir / "out" / "diagnostics.csv");
    CHECK(t.rows.size() == 7);
    for (const auto& row : t.rows) CHECK(io::parse_double(row[t.column("sigma_dot")]) == 0.0);

    const std::string first = slurp(dir / "out" / "manifest.txt");
    o.out_dir = dir / "out2";
    REQUIRE(run(o) == kExitOk);
    CHECK(slurp(dir / "out2" / "manifest.txt") == first);
}
