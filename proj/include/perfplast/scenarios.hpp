// Loading scenarios shared by the CLI, the acceptance checks and the tests.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "perfplast/plasticity.hpp"

namespace perfplast {

enum class LoadingKind {
    Tension,   // uD = a t (x, 0), clamped left and right
    Shear,     // uD = a t (y, 0), clamped bottom and top
    Bending,   // uD = a t (x (2y - 1) + x / 3, 0), clamped left and right
    Constant,  // uD = a (x, 0) for all t
    Bar,       // 1D bar, uD = a t x
};

LoadingKind parse_loading(const std::string& name);
std::string to_string(LoadingKind k);

struct Scenario {
    std::string name;
    int dim = 2;
    int nx = 8;
    int ny = 8;
    DirichletSpec dirichlet{kLeft | kRight};
    Material material;
    LoadingKind loading = LoadingKind::Tension;
    double amplitude = 1.0;
    double T = 1.0;

    Mesh build_mesh() const;
    std::array<double, 2> dirichlet_value(double t, const std::array<double, 2>& x) const;
    // uD interpolated at every node of the grid.
    std::vector<FieldP1> dirichlet_path(const Mesh& m, const TimeGrid& grid) const;
    // Elastic state for uD(0) with z = 0 and ell = 0.
    State initial_state(const Mesh& m) const;
};

// 2D von Mises scenarios that yield within t in (0, 1).
Scenario tension_scenario(int nx = 8);
Scenario shear_scenario(int nx = 8);
Scenario bending_scenario(int nx = 8);
// The 1D bar with K = [-1, 1], C = 1 and uD(t, 1) = 2t.
Scenario bar_scenario(int nx = 4);

// The three shipped 2D scenarios.
std::vector<Scenario> shipped_2d_scenarios(int nx = 8);

}  // namespace perfplast
