#include <doctest.h>

#include <cmath>
#include <random>

#include "perfplast/yield.hpp"

using namespace perfplast;

namespace {

SymTensor scalar(double v) {
    SymTensor t(1);
    t[0] = v;
    return t;
}

SymTensor random_tensor(std::mt19937_64& rng, int dim, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    SymTensor t(dim);
    for (int k = 0; k < t.size(); ++k) t[k] = u(rng);
    return t;
}

}  // namespace

TEST_CASE("projection") {
    const YieldSet vm = YieldSet::von_mises(1.0);
    SymTensor inside(2);
    inside.set(0, 1, 0.3);
    CHECK(project_K(vm, inside) == inside);
    for (double c : {-3.0, 0.0, 7.5}) CHECK(project_K(vm, SymTensor::identity(3) * c) == SymTensor::identity(3) * c);

    CHECK(project_K(YieldSet::uniaxial(1.0), scalar(1.5))[0] == 1.0);
    CHECK(project_K(YieldSet::uniaxial(1.0), scalar(-2.0))[0] == -1.0);

    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const SymTensor t = random_tensor(rng, 3, 3.0);
        const SymTensor p = project_K(vm, t);
        CHECK(p.trace() == doctest::Approx(t.trace()));
        CHECK(frob_norm(deviator(p)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("uniaxial set is 1D only") {
    CHECK_THROWS_AS(project_K(YieldSet::uniaxial(1.0), SymTensor::zero(2)), DimensionMismatch);
    CHECK_THROWS(YieldSet::von_mises(0.0));
}

TEST_CASE("yosida value and derivative") {
    const YieldSet bar = YieldSet::uniaxial(1.0);
    const RegularizationParams rp{0.1, 0.0};
    CHECK(yosida_value(bar, rp, scalar(1.5)) == doctest::Approx(1.25));
    CHECK(yosida_deriv(bar, rp, scalar(1.5))[0] == doctest::Approx(5.0));
    CHECK(yosida_value(bar, rp, scalar(0.5)) == 0.0);
    CHECK(yosida_value(bar, {0.2, 0.0}, scalar(1.5)) == doctest::Approx(0.5 * yosida_value(bar, rp, scalar(1.5))));
    CHECK(yosida_deriv(bar, rp, scalar(0.2)) == SymTensor::zero(1));
    CHECK_THROWS(yosida_value(bar, {0.0, 0.0}, scalar(1.5)));
    CHECK_THROWS(yosida_deriv(bar, {-1.0, 0.0}, scalar(1.5)));

    const YieldSet vm = YieldSet::von_mises(0.5);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const SymTensor t = random_tensor(rng, 2, 2.0);
        const double r = frob_norm(deviator(t));
        const SymTensor g = yosida_deriv(vm, rp, t);
        if (r > 0.5) CHECK(frob_norm(g) == doctest::Approx((r - 0.5) / 0.1));
        CHECK(std::abs(g.trace()) <= 1e-14);
    }
}

TEST_CASE("monotone, 1/lambda-Lipschitz, bounded by |t|/lambda") {
    std::mt19937_64 rng(7);
    for (int dim = 1; dim <= 3; ++dim) {
        const YieldSet vm = YieldSet::von_mises(1.0);
        const RegularizationParams rp{0.05, 0.0};
        for (int i = 0; i < 10000; ++i) {
            const SymTensor a = random_tensor(rng, dim, 2.0), b = random_tensor(rng, dim, 2.0);
            const SymTensor ga = yosida_deriv(vm, rp, a), gb = yosida_deriv(vm, rp, b);
            REQUIRE(frob_inner(ga - gb, a - b) >= -1e-12);
            REQUIRE(frob_norm(ga - gb) <= frob_norm(a - b) / rp.lambda * (1.0 + 1e-12));
            REQUIRE(frob_norm(ga) <= frob_norm(a) / rp.lambda);
        }
    }
}

TEST_CASE("centered difference quotients of a smooth path are monotone") {
    const YieldSet vm = YieldSet::von_mises(0.5);
    const RegularizationParams rp{0.1, 0.0};
    for (int n : {50, 100, 200, 400}) {
        const double h = 1.0 / n;
        auto tau = [](double x) {
            SymTensor t(2);
            t.set(0, 0, std::sin(3.0 * x));
            t.set(1, 1, std::cos(2.0 * x));
            t.set(0, 1, x * x - 0.3);
            return t;
        };
        double worst = 0.0;
        for (int i = 1; i < n; ++i) {
            const SymTensor dt = (tau((i + 1) * h) - tau((i - 1) * h)) * (0.5 / h);
            const SymTensor dg = (yosida_deriv(vm, rp, tau((i + 1) * h)) - yosida_deriv(vm, rp, tau((i - 1) * h))) * (0.5 / h);
            worst = std::min(worst, frob_inner(dg, dt));
        }
        CHECK(worst >= -1e-12 * n);
    }
}

TEST_CASE("smoothed derivative") {
    const YieldSet vm = YieldSet::von_mises(1.0);
    const RegularizationParams rp{0.1, 0.05};
    SymTensor dir(2);
    dir.set(0, 0, 1.0);
    dir.set(1, 1, -1.0);
    dir = dir * (1.0 / frob_norm(dir));

    CHECK(yosida_deriv_smoothed(vm, rp, dir * 0.5) == SymTensor::zero(2));
    const SymTensor far = dir * (1.0 + 10 * rp.huber_eps) + SymTensor::identity(2) * 0.3;
    const SymTensor a = yosida_deriv_smoothed(vm, rp, far), b = yosida_deriv(vm, rp, far);
    CHECK(frob_norm(a - b) <= 1e-14);

    // C^1 across both band edges
    for (double edge : {1.0 - rp.huber_eps, 1.0 + rp.huber_eps}) {
        const double lo = smoothed_magnitude(edge - 1e-9, 1.0, rp.lambda, rp.huber_eps);
        const double hi = smoothed_magnitude(edge + 1e-9, 1.0, rp.lambda, rp.huber_eps);
        CHECK(std::abs(hi - lo) <= 1e-7);
        const double slo = smoothed_magnitude_slope(edge - 1e-12, 1.0, rp.lambda, rp.huber_eps);
        const double shi = smoothed_magnitude_slope(edge + 1e-12, 1.0, rp.lambda, rp.huber_eps);
        CHECK(std::abs(shi - slo) <= 1e-8);
    }

    std::mt19937_64 rng(11);
    double gap = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const SymTensor t = random_tensor(rng, 2, 1.5);
        gap = std::max(gap, frob_norm(yosida_deriv_smoothed(vm, rp, t) - yosida_deriv(vm, rp, t)));
    }
    CHECK(gap <= rp.huber_eps / rp.lambda);

    CHECK_THROWS(yosida_deriv_smoothed(vm, {0.1, 0.0}, far));
    CHECK_THROWS(yosida_deriv_smoothed(vm, {0.1, 1.5}, far));
}

TEST_CASE("smoothed jvp matches finite differences and is symmetric") {
    const YieldSet vm = YieldSet::von_mises(1.0);
    const RegularizationParams rp{0.1, 0.1};
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const SymTensor t = random_tensor(rng, 3, 1.2);
        const SymTensor h = random_tensor(rng, 3, 1.0), k = random_tensor(rng, 3, 1.0);
        const double e = 1e-6;
        const SymTensor fd = (yosida_deriv_smoothed(vm, rp, t + h * e) - yosida_deriv_smoothed(vm, rp, t - h * e)) * (0.5 / e);
        const SymTensor jv = yosida_deriv_smoothed_jvp(vm, rp, t, h);
        CHECK(frob_norm(fd - jv) <= 1e-5 * std::max(1.0, frob_norm(jv)));
        CHECK(frob_inner(jv, k) == doctest::Approx(frob_inner(h, yosida_deriv_smoothed_jvp(vm, rp, t, k))));
    }
}
