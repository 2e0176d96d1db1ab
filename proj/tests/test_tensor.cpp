#include <doctest.h>

#include <random>

#include "perfplast/tensor.hpp"

using namespace perfplast;

namespace {

SymTensor random_tensor(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SymTensor t(dim);
    for (int k = 0; k < t.size(); ++k) t[k] = u(rng);
    return t;
}

double max_abs_diff(const SymTensor& a, const SymTensor& b) {
    double m = 0.0;
    for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("canonical component order") {
    SymTensor t(3);
    t.set(0, 1, 4.0);
    t.set(0, 2, 5.0);
    t.set(1, 2, 6.0);
    CHECK(t[3] == 4.0);
    CHECK(t[4] == 5.0);
    CHECK(t[5] == 6.0);
    CHECK(t(2, 1) == 6.0);
    CHECK(SymTensor::num_components(2) == 3);
    const double c[] = {1.0, 2.0, 3.0};
    const SymTensor s = SymTensor::from_components(2, c);
    CHECK(s(0, 1) == 3.0);
    CHECK(s(1, 1) == 2.0);
    CHECK_THROWS(SymTensor::from_components(3, c));
}

TEST_CASE("deviator") {
    CHECK(deviator(SymTensor::identity(2)) == SymTensor::zero(2));
    const double d20[] = {2.0, 0.0};
    const double d1m1[] = {1.0, -1.0};
    CHECK(deviator(SymTensor::diag(d20)) == SymTensor::diag(d1m1));

    std::mt19937_64 rng(3);
    for (int dim = 1; dim <= 3; ++dim) {
        for (int i = 0; i < 1000; ++i) {
            const SymTensor t = random_tensor(rng, dim);
            const SymTensor d = deviator(t);
            CHECK(std::abs(d.trace()) <= 1e-14 * std::max(1.0, frob_norm(t)));
            CHECK(max_abs_diff(deviator(d), d) <= 1e-14);
        }
    }
}

TEST_CASE("frobenius inner product") {
    CHECK(frob_inner(SymTensor::identity(3), SymTensor::identity(3)) == 3.0);
    SymTensor off(3);
    off.set(0, 1, 1.0);
    CHECK(frob_inner(off, off) == 2.0);
    std::mt19937_64 rng(4);
    const SymTensor a = random_tensor(rng, 2);
    CHECK(frob_inner(a, a) >= 0.0);
    CHECK(frob_inner(a, a) == doctest::Approx(frob_norm(a) * frob_norm(a)));
    CHECK_THROWS_AS(frob_inner(a, SymTensor::zero(3)), DimensionMismatch);
}

TEST_CASE("elasticity pair") {
    const ElasticityTensor e(1.0, 1.0);
    CHECK(apply_C(e, SymTensor::identity(2)) == SymTensor::identity(2) * 4.0);

    std::mt19937_64 rng(5);
    const ElasticityTensor el(0.7, 0.3);
    for (int dim = 1; dim <= 3; ++dim) {
        for (int i = 0; i < 10000; ++i) {
            const SymTensor t = random_tensor(rng, dim);
            const SymTensor back = apply_A(el, apply_C(el, t));
            REQUIRE(max_abs_diff(back, t) <= 1e-14 * std::max(1.0, frob_norm(t)) * 4);
            const double lhs = frob_inner(apply_C(el, t), t);
            REQUIRE(lhs >= el.coercivity_C() * frob_inner(t, t) * (1.0 - 1e-12));
            REQUIRE(frob_inner(apply_A(el, t), t) >= el.coercivity_A(dim) * frob_inner(t, t) * (1.0 - 1e-12));
            REQUIRE(std::abs(apply_C(el, deviator(t)).trace()) <= 1e-14);
            REQUIRE(max_abs_diff(apply_C(el, deviator(t)), deviator(apply_C(el, t))) <= 1e-14);
            REQUIRE(max_abs_diff(apply_A(el, deviator(t)), deviator(apply_A(el, t))) <= 1e-14);
        }
    }
    CHECK(el.norm_C(2) == doctest::Approx(0.6 + 1.4));
}

TEST_CASE("sym_outer symmetrizes") {
    const double a[] = {1.0, 0.0};
    const double b[] = {0.0, 1.0};
    const SymTensor s = sym_outer(2, a, b);
    CHECK(s(0, 1) == 0.5);
    CHECK(s(0, 0) == 0.0);
}
