#include "perfplast/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>

namespace perfplast {

namespace {

// Strain of the basis function (local node a, component i) on cell c.
SymTensor basis_strain(const Mesh& m, int c, int a, int i) {
    const int n = m.dim();
    std::array<double, 2> e{0.0, 0.0};
    e[i] = 1.0;
    const auto& g = m.basis_gradient(c, a);
    return sym_outer(n, std::span<const double>(e.data(), n), std::span<const double>(g.data(), n));
}

using Triplets = std::vector<Eigen::Triplet<double>>;

}  // namespace

FieldP0 zero_field_p0(const Mesh& m) { return FieldP0(m.num_cells(), SymTensor::zero(m.dim())); }

FieldP1 zero_field_p1(const Mesh& m) { return FieldP1::Zero(m.num_dofs()); }

FieldP0 strain(const Mesh& m, const FieldP1& u) {
    if (u.size() != m.num_dofs()) throw DimensionMismatch("strain: field does not match mesh");
    const int n = m.dim();
    FieldP0 out = zero_field_p0(m);
    for (int c = 0; c < m.num_cells(); ++c) {
        // grad u = sum_a u_a (x) g_a
        double grad[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (int a = 0; a < n + 1; ++a) {
            const int node = m.cell(c)[a];
            const auto& g = m.basis_gradient(c, a);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) grad[i][j] += u[node * n + i] * g[j];
            }
        }
        SymTensor& e = out[c];
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) e.set(i, j, 0.5 * (grad[i][j] + grad[j][i]));
        }
    }
    return out;
}

FieldP1 strain_transpose(const Mesh& m, const FieldP0& s) {
    if (static_cast<int>(s.size()) != m.num_cells()) throw DimensionMismatch("strain_transpose: size mismatch");
    const int n = m.dim();
    FieldP1 out = zero_field_p1(m);
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int a = 0; a < n + 1; ++a) {
            const int node = m.cell(c)[a];
            const auto& g = m.basis_gradient(c, a);
            // s : sym(e_i (x) g) = sum_j s_ij g_j
            for (int i = 0; i < n; ++i) {
                double v = 0.0;
                for (int j = 0; j < n; ++j) v += s[c](i, j) * g[j];
                out[node * n + i] += v;
            }
        }
    }
    return out;
}

double l2_norm_sq(const Mesh& m, const FieldP0& s) {
    double acc = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) acc += m.cell_volume(c) * frob_inner(s[c], s[c]);
    return acc;
}

double max_abs_trace(const FieldP0& s) {
    double mx = 0.0;
    for (const auto& t : s) mx = std::max(mx, std::abs(t.trace()));
    return mx;
}

SparseMatrix assemble_stiffness(const Mesh& m, const ElasticityTensor& e) {
    const int n = m.dim();
    const int k = n + 1;
    Triplets trip;
    trip.reserve(static_cast<std::size_t>(m.num_cells() * k * k * n * n));
    for (int c = 0; c < m.num_cells(); ++c) {
        const double vol = m.cell_volume(c);
        for (int a = 0; a < k; ++a) {
            for (int i = 0; i < n; ++i) {
                const SymTensor sa = apply_C(e, basis_strain(m, c, a, i));
                const int row = m.cell(c)[a] * n + i;
                for (int b = 0; b < k; ++b) {
                    for (int j = 0; j < n; ++j) {
                        const int col = m.cell(c)[b] * n + j;
                        trip.emplace_back(row, col, vol * frob_inner(sa, basis_strain(m, c, b, j)));
                    }
                }
            }
        }
    }
    SparseMatrix K(m.num_dofs(), m.num_dofs());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

SparseMatrix h1_gram(const Mesh& m) {
    const int n = m.dim();
    const int k = n + 1;
    Triplets trip;
    const auto mass = m.lumped_mass();
    for (int a = 0; a < m.num_nodes(); ++a) {
        for (int i = 0; i < n; ++i) trip.emplace_back(a * n + i, a * n + i, mass[a]);
    }
    for (int c = 0; c < m.num_cells(); ++c) {
        const double vol = m.cell_volume(c);
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                const auto& ga = m.basis_gradient(c, a);
                const auto& gb = m.basis_gradient(c, b);
                double dot = 0.0;
                for (int d = 0; d < n; ++d) dot += ga[d] * gb[d];
                for (int i = 0; i < n; ++i) trip.emplace_back(m.cell(c)[a] * n + i, m.cell(c)[b] * n + i, vol * dot);
            }
        }
    }
    SparseMatrix G(m.num_dofs(), m.num_dofs());
    G.setFromTriplets(trip.begin(), trip.end());
    return G;
}

SparseMatrix nodal_recovery(const Mesh& m) {
    std::vector<double> patch(m.num_nodes(), 0.0);
    const int k = m.nodes_per_cell();
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int a = 0; a < k; ++a) patch[m.cell(c)[a]] += m.cell_volume(c);
    }
    Triplets trip;
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int a = 0; a < k; ++a) {
            const int node = m.cell(c)[a];
            trip.emplace_back(node, c, m.cell_volume(c) / patch[node]);
        }
    }
    SparseMatrix R(m.num_nodes(), m.num_cells());
    R.setFromTriplets(trip.begin(), trip.end());
    return R;
}

SparseMatrix cell_derivative(const Mesh& m, int k) {
    Triplets trip;
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int a = 0; a < m.nodes_per_cell(); ++a) trip.emplace_back(c, m.cell(c)[a], m.basis_gradient(c, a)[k]);
    }
    SparseMatrix D(m.num_cells(), m.num_nodes());
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

SparseMatrix recovered_hessian(const Mesh& m) {
    const int n = m.dim();
    const int nn = m.num_nodes();
    const int nc = m.num_cells();
    const SparseMatrix R = nodal_recovery(m);
    std::vector<SparseMatrix> D;
    for (int k = 0; k < n; ++k) D.push_back(cell_derivative(m, k));

    Eigen::VectorXd w(nc);
    for (int c = 0; c < nc; ++c) w[c] = std::sqrt(m.cell_volume(c));

    // Block rows: (component i, first direction k, second direction l) x cells.
    Triplets trip;
    int block = 0;
    for (int k = 0; k < n; ++k) {
        const SparseMatrix RDk = R * D[k];  // nodes x nodes
        for (int l = 0; l < n; ++l) {
            SparseMatrix H = w.asDiagonal() * (D[l] * RDk);  // cells x nodes
            for (int i = 0; i < n; ++i, ++block) {
                for (int outer = 0; outer < H.outerSize(); ++outer) {
                    for (SparseMatrix::InnerIterator it(H, outer); it; ++it) {
                        trip.emplace_back(block * nc + static_cast<int>(it.row()), static_cast<int>(it.col()) * n + i,
                                          it.value());
                    }
                }
            }
        }
    }
    SparseMatrix out(block * nc, nn * n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

double recovered_w1p_norm(const Mesh& m, const FieldP0& s, double p) {
    const int n = m.dim();
    const int nc = m.num_cells();
    const int ncomp = SymTensor::num_components(n);
    const SparseMatrix R = nodal_recovery(m);
    std::vector<SparseMatrix> D;
    for (int k = 0; k < n; ++k) D.push_back(cell_derivative(m, k));

    // Squared Frobenius norm of the recovered gradient per cell.
    Eigen::VectorXd grad_sq = Eigen::VectorXd::Zero(nc);
    for (int q = 0; q < ncomp; ++q) {
        Eigen::VectorXd comp(nc);
        for (int c = 0; c < nc; ++c) comp[c] = s[c][q];
        const Eigen::VectorXd nodal = R * comp;
        const double mult = q < n ? 1.0 : 2.0;
        for (int k = 0; k < n; ++k) {
            const Eigen::VectorXd dk = D[k] * nodal;
            grad_sq += mult * dk.cwiseAbs2();
        }
    }
    double acc = 0.0;
    for (int c = 0; c < nc; ++c) {
        acc += m.cell_volume(c) * (std::pow(frob_norm(s[c]), p) + std::pow(std::sqrt(grad_sq[c]), p));
    }
    return std::pow(acc, 1.0 / p);
}

EquilibriumSolver::EquilibriumSolver(const Mesh& mesh, const ElasticityTensor& elast, LinearSolverKind kind)
    : mesh_(std::make_shared<const Mesh>(mesh)), elast_(elast), kind_(kind) {
    const int n = mesh.dim();
    if (mesh.dirichlet_nodes().empty()) {
        throw SolverError("singular system: the Dirichlet boundary is empty");
    }
    K_ = assemble_stiffness(mesh, elast);

    dirichlet_dof_.assign(mesh.num_dofs(), 0);
    for (int node : mesh.dirichlet_nodes()) {
        for (int i = 0; i < n; ++i) dirichlet_dof_[node * n + i] = 1;
    }
    std::vector<int> local(mesh.num_dofs(), -1);
    for (int d = 0; d < mesh.num_dofs(); ++d) {
        if (dirichlet_dof_[d]) {
            local[d] = static_cast<int>(fixed_.size());
            fixed_.push_back(d);
        } else {
            local[d] = static_cast<int>(free_.size());
            free_.push_back(d);
        }
    }

    Triplets tff, tfd;
    for (int outer = 0; outer < K_.outerSize(); ++outer) {
        for (SparseMatrix::InnerIterator it(K_, outer); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = static_cast<int>(it.col());
            if (dirichlet_dof_[r]) continue;
            if (dirichlet_dof_[c]) tfd.emplace_back(local[r], local[c], it.value());
            else tff.emplace_back(local[r], local[c], it.value());
        }
    }
    K_ff_.resize(static_cast<int>(free_.size()), static_cast<int>(free_.size()));
    K_ff_.setFromTriplets(tff.begin(), tff.end());
    K_fd_.resize(static_cast<int>(free_.size()), static_cast<int>(fixed_.size()));
    K_fd_.setFromTriplets(tfd.begin(), tfd.end());

    if (kind_ == LinearSolverKind::Cholesky && !free_.empty()) {
        llt_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>(K_ff_);
        if (llt_->info() != Eigen::Success) {
            throw SolverError("singular system: Cholesky factorization of the constrained stiffness failed");
        }
    }
}

EquilibriumSolver::~EquilibriumSolver() = default;

Eigen::VectorXd EquilibriumSolver::solve_free(const Eigen::VectorXd& rhs) const {
    if (free_.empty()) return Eigen::VectorXd();
    if (kind_ == LinearSolverKind::Cholesky) return llt_->solve(rhs);
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg(K_ff_);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(10 * static_cast<int>(free_.size()) + 100);
    Eigen::VectorXd x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) {
        throw SolverError("conjugate gradient did not converge, residual " + std::to_string(cg.error()));
    }
    return x;
}

LoadVector EquilibriumSolver::plastic_load(const FieldP0& z) const {
    const Mesh& m = *mesh_;
    if (static_cast<int>(z.size()) != m.num_cells()) throw DimensionMismatch("plastic_load: size mismatch");
    FieldP0 cz(z.size());
    for (int c = 0; c < m.num_cells(); ++c) cz[c] = apply_C(elast_, z[c]) * m.cell_volume(c);
    return strain_transpose(m, cz);
}

FieldP0 EquilibriumSolver::plastic_load_transpose(const FieldP1& y) const {
    const Mesh& m = *mesh_;
    FieldP0 e = strain(m, y);
    for (int c = 0; c < m.num_cells(); ++c) e[c] = apply_C(elast_, e[c]) * m.cell_volume(c);
    return e;
}

FieldP1 EquilibriumSolver::solve_homogeneous(const FieldP1& r) const {
    Eigen::VectorXd rf(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) rf[k] = r[free_[k]];
    const Eigen::VectorXd x = solve_free(rf);
    FieldP1 out = FieldP1::Zero(mesh_->num_dofs());
    for (std::size_t k = 0; k < free_.size(); ++k) out[free_[k]] = x[k];
    return out;
}

FieldP1 EquilibriumSolver::lifting_transpose(const FieldP1& y) const {
    Eigen::VectorXd yf(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) yf[k] = y[free_[k]];
    const Eigen::VectorXd v = -(K_fd_.transpose() * yf);
    FieldP1 out = FieldP1::Zero(mesh_->num_dofs());
    for (std::size_t k = 0; k < fixed_.size(); ++k) out[fixed_[k]] = v[k];
    return out;
}

FieldP1 EquilibriumSolver::solve_displacement(const FieldP0& z, const FieldP1& uD, const LoadVector& ell) const {
    const Mesh& m = *mesh_;
    if (uD.size() != m.num_dofs() || ell.size() != m.num_dofs()) {
        throw DimensionMismatch("solve_equilibrium: field does not match mesh");
    }
    const LoadVector rhs_full = ell + plastic_load(z);
    Eigen::VectorXd ud(fixed_.size());
    for (std::size_t k = 0; k < fixed_.size(); ++k) ud[k] = uD[fixed_[k]];
    Eigen::VectorXd rf(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) rf[k] = rhs_full[free_[k]];
    rf -= K_fd_ * ud;
    const Eigen::VectorXd x = solve_free(rf);

    FieldP1 u(m.num_dofs());
    for (std::size_t k = 0; k < free_.size(); ++k) u[free_[k]] = x[k];
    for (std::size_t k = 0; k < fixed_.size(); ++k) u[fixed_[k]] = ud[k];
    return u;
}

FieldP0 EquilibriumSolver::stress(const FieldP1& u, const FieldP0& z) const {
    FieldP0 s = strain(*mesh_, u);
    for (std::size_t c = 0; c < s.size(); ++c) s[c] = apply_C(elast_, s[c] - z[c]);
    return s;
}

EquilibriumSolver::Solution EquilibriumSolver::solve(const FieldP0& z, const FieldP1& uD,
                                                     const LoadVector& ell) const {
    Solution sol;
    sol.u = solve_displacement(z, uD, ell);
    sol.sigma = stress(sol.u, z);
    return sol;
}

double EquilibriumSolver::relative_residual(const FieldP1& u, const FieldP0& z, const LoadVector& ell) const {
    const Eigen::VectorXd rhs = ell + plastic_load(z);
    const Eigen::VectorXd res = K_ * u - rhs;
    double num = 0.0, den = 0.0;
    for (int d : free_) {
        num += res[d] * res[d];
        den += rhs[d] * rhs[d];
    }
    // Include the stiffness scale so that a zero right-hand side is handled.
    const double scale = std::max(std::sqrt(den), K_.norm() * u.norm());
    return scale > 0.0 ? std::sqrt(num) / scale : std::sqrt(num);
}

double EquilibriumSolver::dual_norm_sq(const LoadVector& ell) const {
    Eigen::VectorXd lf(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) lf[k] = ell[free_[k]];
    if (lf.size() == 0) return 0.0;
    return lf.dot(solve_free(lf));
}

}  // namespace perfplast
