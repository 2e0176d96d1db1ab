// Closed-form solutions of the perfectly plastic bar on (0, 1):
//   Gamma_D = {0, 1}, T = 1, K = [-1, 1], C = 1, (sigma_0, u_0) = 0,
//   u_D(t, x) = 2 t x.
// The stress is unique and spatially constant; the displacement is not
// unique after the bar yields at t = 1/2.
#pragma once

#include <functional>
#include <string>

namespace perfplast::oned {

struct Scenario {
    static constexpr double kYield = 1.0;
    static constexpr double kModulus = 1.0;
    static constexpr double kEndTime = 1.0;
    static constexpr double kStrainRate = 2.0;  // u_D(t, x) = 2 t x

    static double dirichlet_right(double t) { return kStrainRate * t; }
};

struct Variant {
    enum class Kind { Linear, TwoPhase, Frozen };

    Kind kind = Kind::Linear;
    double alpha = 0.0;  // frozen: rate of the right part, in [0, 2]
    double beta = 0.5;   // two-phase / frozen: interface position, in [0, 1]

    static Variant linear() { return {Kind::Linear, 0.0, 0.5}; }
    static Variant two_phase(double beta);
    static Variant frozen(double alpha, double beta);

    std::string name() const;
};

// sigma(t) = 2t for t <= 1/2 and 1 afterwards.
double exact_stress(double t);
// One-sided (left) time derivative of exact_stress.
double exact_stress_rate(double t);

double displacement(const Variant& v, double t, double x);
// d/dx u(t, x), evaluated on the piece containing x (x = beta belongs to the
// left piece).
double displacement_gradient(const Variant& v, double t, double x);
// d/dt d/dx u(t, x) away from the slip interface; left derivative at t = 1/2.
double strain_rate(const Variant& v, double t, double x);

struct WeakSolutionReport {
    double equilibrium = 0.0;    // max_x |sigma(t, x) - sigma(t, 0)|
    double admissibility = 0.0;  // max (|sigma| - 1)^+
    double flow_rule = 0.0;      // distance of (u_x' - sigma') to the normal cone of K at sigma
    int points_checked = 0;
    int points_excluded = 0;  // inside the slip exclusion window

    double max_violation() const;
};

using StressField = std::function<double(double t, double x)>;

/// Samples a (resolution + 1)^2 grid of [0, 1]^2 and checks the pair
/// (variant displacement, stress) against the 1D weak formulation. Points with
/// |x - beta| < 1 / resolution are skipped for the non-linear variants, since
/// the plastic strain rate concentrates at x = beta there.
WeakSolutionReport verify_weak_solution(const Variant& v, int resolution, const StressField& stress = {});

}  // namespace perfplast::oned
