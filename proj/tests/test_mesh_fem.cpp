#include <doctest.h>

#include <random>

#include "perfplast/fem.hpp"
#include "perfplast/mesh.hpp"

using namespace perfplast;

TEST_CASE("rect mesh counts") {
    const Mesh one = build_rect_mesh(1, 1, DirichletSpec{kAllSides});
    CHECK(one.num_nodes() == 4);
    CHECK(one.num_cells() == 2);
    CHECK(one.facets().size() == 4);
    for (int nx : {1, 3, 8}) {
        for (int ny : {1, 2, 5}) {
            const Mesh m = build_rect_mesh(nx, ny, DirichletSpec::parse("left,right"));
            CHECK(m.num_nodes() == (nx + 1) * (ny + 1));
            CHECK(m.num_cells() == 2 * nx * ny);
            CHECK(m.facets().size() == static_cast<std::size_t>(2 * (nx + ny)));
            int dirichlet = 0;
            for (const auto& f : m.facets()) {
                const bool want = f.side == kLeft || f.side == kRight;
                CHECK((f.tag == BoundaryTag::Dirichlet) == want);
                dirichlet += want;
            }
            CHECK(dirichlet == 2 * ny);
            CHECK(m.total_volume() == doctest::Approx(1.0));
        }
    }
    CHECK_THROWS(build_rect_mesh(0, 2, DirichletSpec{}));
    CHECK_THROWS(build_interval_mesh(0, DirichletSpec{}));
    CHECK_THROWS(DirichletSpec::parse("left,middle"));
}

TEST_CASE("node ordering is deterministic") {
    const Mesh a = build_rect_mesh(3, 2, DirichletSpec{kAllSides});
    const Mesh b = build_rect_mesh(3, 2, DirichletSpec{kAllSides});
    CHECK(a == b);
    CHECK(a.node(0)[0] == 0.0);
    CHECK(a.node(1)[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("strain of affine and rigid fields") {
    const Mesh m = build_rect_mesh(4, 3, DirichletSpec{kAllSides});
    const double B[2][2] = {{0.3, -0.2}, {-0.2, 0.7}};
    const FieldP1 u = interpolate_p1(m, [&](const std::array<double, 2>& x) {
        return std::array<double, 2>{B[0][0] * x[0] + B[0][1] * x[1] + 1.0, B[1][0] * x[0] + B[1][1] * x[1] - 2.0};
    });
    for (const auto& e : strain(m, u)) {
        CHECK(e(0, 0) == doctest::Approx(0.3));
        CHECK(e(1, 1) == doctest::Approx(0.7));
        CHECK(e(0, 1) == doctest::Approx(-0.2));
    }
    const FieldP1 rot = interpolate_p1(m, [](const std::array<double, 2>& x) {
        return std::array<double, 2>{-0.4 * x[1], 0.4 * x[0]};
    });
    for (const auto& e : strain(m, rot)) CHECK(frob_norm(e) <= 1e-14);
    for (const auto& e : strain(m, zero_field_p1(m))) CHECK(e == SymTensor::zero(2));
    CHECK_THROWS(strain(m, FieldP1::Zero(3)));
}

TEST_CASE("strain transpose is the adjoint") {
    const Mesh m = build_rect_mesh(3, 3, DirichletSpec{kAllSides});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-1, 1);
    FieldP1 u(m.num_dofs());
    for (int i = 0; i < u.size(); ++i) u[i] = d(rng);
    FieldP0 s = zero_field_p0(m);
    for (auto& t : s)
        for (int k = 0; k < t.size(); ++k) t[k] = d(rng);
    const FieldP0 e = strain(m, u);
    double lhs = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) lhs += frob_inner(e[c], s[c]);
    CHECK(lhs == doctest::Approx(u.dot(strain_transpose(m, s))));
}

TEST_CASE("equilibrium patch test and rigid motion") {
    const ElasticityTensor el(0.5, 0.5);
    const Mesh m = build_rect_mesh(6, 6, DirichletSpec{kAllSides});
    const EquilibriumSolver eq(m, el);
    const FieldP1 uD = interpolate_p1(m, [](const std::array<double, 2>& x) {
        return std::array<double, 2>{0.1 * x[0] + 0.05 * x[1], 0.05 * x[0] - 0.2 * x[1]};
    });
    const auto sol = eq.solve(zero_field_p0(m), uD, LoadVector::Zero(m.num_dofs()));
    CHECK((sol.u - uD).cwiseAbs().maxCoeff() <= 1e-12);
    SymTensor B(2);
    B.set(0, 0, 0.1);
    B.set(1, 1, -0.2);
    B.set(0, 1, 0.05);
    const SymTensor CB = apply_C(el, B);
    for (const auto& s : sol.sigma) CHECK(frob_norm(s - CB) <= 1e-12);

    const Mesh mr = build_rect_mesh(5, 5, DirichletSpec::parse("left"));
    const EquilibriumSolver er(mr, el);
    const FieldP1 rigid = interpolate_p1(mr, [](const std::array<double, 2>& x) {
        return std::array<double, 2>{0.2 - 0.3 * x[1], -0.1 + 0.3 * x[0]};
    });
    const auto sr = er.solve(zero_field_p0(mr), rigid, LoadVector::Zero(mr.num_dofs()));
    for (const auto& s : sr.sigma) CHECK(frob_norm(s) <= 1e-12);
}

TEST_CASE("1D bar with eigenstrain") {
    const ElasticityTensor unit(0.0, 0.5);
    const double g = 0.7;
    for (int n : {1, 3, 7}) {
        const Mesh m = build_interval_mesh(n, DirichletSpec::parse("left,right"));
        const EquilibriumSolver eq(m, unit);
        FieldP0 z = zero_field_p0(m);
        double mean = 0.0;
        for (int c = 0; c < n; ++c) {
            z[c][0] = 0.1 * (c + 1) - 0.25;
            mean += z[c][0] * m.cell_volume(c);
        }
        FieldP1 uD = zero_field_p1(m);
        uD[n] = g;
        const auto sol = eq.solve(z, uD, LoadVector::Zero(m.num_dofs()));
        for (const auto& s : sol.sigma) CHECK(s[0] == doctest::Approx(g - mean).epsilon(1e-12));
    }
}

TEST_CASE("solver residual and errors") {
    const ElasticityTensor el(0.5, 0.5);
    const Mesh m = build_rect_mesh(8, 8, DirichletSpec::parse("left,right"));
    const EquilibriumSolver eq(m, el);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> d(-1, 1);
    FieldP0 z = zero_field_p0(m);
    for (auto& t : z) {
        t.set(0, 0, d(rng));
        t.set(1, 1, -t(0, 0));
        t.set(0, 1, d(rng));
    }
    LoadVector ell(m.num_dofs());
    for (int i = 0; i < ell.size(); ++i) ell[i] = eq.is_dirichlet_dof(i) ? 0.0 : 1e-2 * d(rng);
    const FieldP1 uD = zero_field_p1(m);
    const FieldP1 u = eq.solve_displacement(z, uD, ell);
    CHECK(eq.relative_residual(u, z, ell) <= 1e-10);
    CHECK(eq.dual_norm_sq(ell) > 0.0);

    const Mesh free_mesh = build_rect_mesh(2, 2, DirichletSpec{0u});
    CHECK_THROWS_AS(EquilibriumSolver(free_mesh, el), SolverError);
}
