#include "perfplast/analytic_1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perfplast::oned {

namespace {

void check_time_space(double t, double x) {
    if (!(t >= 0.0 && t <= 1.0) || !(x >= 0.0 && x <= 1.0)) {
        throw std::out_of_range("displacement_family: (t, x) must lie in [0, 1]^2");
    }
}

bool yielded(double t) { return t > 0.5; }

}  // namespace

Variant Variant::two_phase(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::out_of_range("two-phase variant: beta must lie in [0, 1]");
    return {Kind::TwoPhase, 0.0, beta};
}

Variant Variant::frozen(double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha <= 2.0)) throw std::out_of_range("frozen variant: alpha must lie in [0, 2]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::out_of_range("frozen variant: beta must lie in [0, 1]");
    return {Kind::Frozen, alpha, beta};
}

std::string Variant::name() const {
    switch (kind) {
        case Kind::Linear: return "linear";
        case Kind::TwoPhase: return "two-phase(beta=" + std::to_string(beta) + ")";
        case Kind::Frozen: return "frozen(alpha=" + std::to_string(alpha) + ",beta=" + std::to_string(beta) + ")";
    }
    return "unknown";
}

double exact_stress(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("exact_stress: t must lie in [0, 1]");
    return yielded(t) ? 1.0 : 2.0 * t;
}

double exact_stress_rate(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("exact_stress_rate: t must lie in [0, 1]");
    return yielded(t) ? 0.0 : 2.0;
}

double displacement(const Variant& v, double t, double x) {
    check_time_space(t, x);
    if (!yielded(t) || v.kind == Variant::Kind::Linear) return 2.0 * t * x;
    if (v.kind == Variant::Kind::TwoPhase) {
        if (x <= v.beta) {
            if (v.beta == 0.0) return 0.0;
            return 2.0 * t * x / v.beta + x - x / v.beta;
        }
        return 2.0 * t + x - 1.0;
    }
    if (x <= v.beta) return x;
    return v.alpha * t + x - 0.5 * v.alpha;
}

double displacement_gradient(const Variant& v, double t, double x) {
    check_time_space(t, x);
    if (!yielded(t) || v.kind == Variant::Kind::Linear) return 2.0 * t;
    if (v.kind == Variant::Kind::TwoPhase) {
        if (x <= v.beta && v.beta > 0.0) return 2.0 * t / v.beta + 1.0 - 1.0 / v.beta;
        return 1.0;
    }
    return 1.0;
}

double strain_rate(const Variant& v, double t, double x) {
    check_time_space(t, x);
    if (!yielded(t) || v.kind == Variant::Kind::Linear) return 2.0;
    if (v.kind == Variant::Kind::TwoPhase && x <= v.beta && v.beta > 0.0) return 2.0 / v.beta;
    return 0.0;
}

double WeakSolutionReport::max_violation() const { return std::max({equilibrium, admissibility, flow_rule}); }

WeakSolutionReport verify_weak_solution(const Variant& v, int resolution, const StressField& stress) {
    if (resolution < 1) throw std::invalid_argument("verify_weak_solution: resolution must be positive");
    const StressField sigma = stress ? stress : StressField([](double t, double) { return exact_stress(t); });
    const double h = 1.0 / resolution;
    const bool has_interface = v.kind != Variant::Kind::Linear;
    constexpr double kBoundaryTol = 1e-12;

    WeakSolutionReport rep;
    for (int i = 0; i <= resolution; ++i) {
        const double t = i * h;
        const double s0 = sigma(t, 0.0);
        // Exact rate for the closed form, left difference for a supplied field.
        double s_rate = exact_stress_rate(t);
        if (stress && i > 0) s_rate = (s0 - sigma(t - h, 0.0)) / h;
        for (int j = 0; j <= resolution; ++j) {
            const double x = j * h;
            if (has_interface && yielded(t) && std::abs(x - v.beta) < h) {
                ++rep.points_excluded;
                continue;
            }
            ++rep.points_checked;
            const double s = sigma(t, x);
            rep.equilibrium = std::max(rep.equilibrium, std::abs(s - s0));
            rep.admissibility = std::max(rep.admissibility, std::abs(s) - Scenario::kYield);

            // Plastic strain rate z' = u_x' - A sigma' must lie in the normal
            // cone of K at sigma.
            const double zdot = strain_rate(v, t, x) - s_rate / Scenario::kModulus;
            double dist;
            if (s >= Scenario::kYield - kBoundaryTol) dist = std::max(0.0, -zdot);
            else if (s <= -Scenario::kYield + kBoundaryTol) dist = std::max(0.0, zdot);
            else dist = std::abs(zdot);
            rep.flow_rule = std::max(rep.flow_rule, dist);
        }
    }
    rep.admissibility = std::max(0.0, rep.admissibility);
    return rep;
}

}  // namespace perfplast::oned
