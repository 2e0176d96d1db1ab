#include "perfplast/scenarios.hpp"

#include <stdexcept>

namespace perfplast {

LoadingKind parse_loading(const std::string& name) {
    if (name == "tension") return LoadingKind::Tension;
    if (name == "shear") return LoadingKind::Shear;
    if (name == "bending") return LoadingKind::Bending;
    if (name == "constant") return LoadingKind::Constant;
    if (name == "bar") return LoadingKind::Bar;
    throw std::invalid_argument("unknown loading '" + name + "'");
}

std::string to_string(LoadingKind k) {
    switch (k) {
        case LoadingKind::Tension: return "tension";
        case LoadingKind::Shear: return "shear";
        case LoadingKind::Bending: return "bending";
        case LoadingKind::Constant: return "constant";
        case LoadingKind::Bar: return "bar";
    }
    return "unknown";
}

Mesh Scenario::build_mesh() const {
    if (dim == 1) return build_interval_mesh(nx, dirichlet);
    if (dim == 2) return build_rect_mesh(nx, ny, dirichlet);
    throw std::invalid_argument("Scenario: dim must be 1 or 2");
}

std::array<double, 2> Scenario::dirichlet_value(double t, const std::array<double, 2>& x) const {
    const double a = amplitude;
    switch (loading) {
        case LoadingKind::Tension: return {a * t * x[0], 0.0};
        case LoadingKind::Shear: return {a * t * x[1], 0.0};
        case LoadingKind::Bending: return {a * t * (x[0] * (2.0 * x[1] - 1.0) + x[0] / 3.0), 0.0};
        case LoadingKind::Constant: return {a * x[0], 0.0};
        case LoadingKind::Bar: return {a * t * x[0], 0.0};
    }
    return {0.0, 0.0};
}

std::vector<FieldP1> Scenario::dirichlet_path(const Mesh& m, const TimeGrid& grid) const {
    std::vector<FieldP1> path;
    path.reserve(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) {
        const double t = grid.t(k);
        path.push_back(interpolate_p1(m, [&](const std::array<double, 2>& x) { return dirichlet_value(t, x); }));
    }
    return path;
}

State Scenario::initial_state(const Mesh& m) const {
    EquilibriumSolver eq(m, material.elasticity);
    const FieldP1 uD0 = interpolate_p1(m, [&](const std::array<double, 2>& x) { return dirichlet_value(0.0, x); });
    const auto sol = eq.solve(zero_field_p0(m), uD0, zero_field_p1(m));
    return {sol.u, sol.sigma, zero_field_p0(m)};
}

namespace {

Scenario planar(const std::string& name, int nx, LoadingKind k, unsigned sides, double amplitude) {
    Scenario s;
    s.name = name;
    s.dim = 2;
    s.nx = nx;
    s.ny = nx;
    s.dirichlet = DirichletSpec{sides};
    s.material = {ElasticityTensor(0.5, 0.5), YieldSet::von_mises(0.25)};
    s.loading = k;
    s.amplitude = amplitude;
    return s;
}

}  // namespace

Scenario tension_scenario(int nx) { return planar("tension", nx, LoadingKind::Tension, kLeft | kRight, 0.5); }
Scenario shear_scenario(int nx) { return planar("shear", nx, LoadingKind::Shear, kBottom | kTop, 0.5); }
Scenario bending_scenario(int nx) { return planar("bending", nx, LoadingKind::Bending, kLeft | kRight, 0.6); }

Scenario bar_scenario(int nx) {
    Scenario s;
    s.name = "bar";
    s.dim = 1;
    s.nx = nx;
    s.ny = 1;
    s.dirichlet = DirichletSpec{kLeft | kRight};
    // 2 mu + lambda = 1
    s.material = {ElasticityTensor(0.0, 0.5), YieldSet::uniaxial(1.0)};
    s.loading = LoadingKind::Bar;
    s.amplitude = 2.0;
    return s;
}

std::vector<Scenario> shipped_2d_scenarios(int nx) {
    return {tension_scenario(nx), shear_scenario(nx), bending_scenario(nx)};
}

}  // namespace perfplast
