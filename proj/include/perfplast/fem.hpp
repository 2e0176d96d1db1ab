// P1 displacement / P0 tensor discretization of linear elasticity with a
// prescribed plastic strain.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <stdexcept>
#include <vector>

#include "perfplast/mesh.hpp"
#include "perfplast/tensor.hpp"

namespace perfplast {

// Nodal displacement-like field, dof index node * dim + component.
using FieldP1 = Eigen::VectorXd;
// One tensor per cell.
using FieldP0 = std::vector<SymTensor>;
// Assembled nodal dual vector; entries on Dirichlet dofs are ignored.
using LoadVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

FieldP0 zero_field_p0(const Mesh& m);
FieldP1 zero_field_p1(const Mesh& m);

// Cell-wise symmetric gradient of a P1 field.
FieldP0 strain(const Mesh& m, const FieldP1& u);
// Adjoint of strain in the pairing sum_T s_T : strain(u)_T (no cell volumes).
FieldP1 strain_transpose(const Mesh& m, const FieldP0& s);

// Nodal interpolant of a displacement function x -> u(x).
template <class F>
FieldP1 interpolate_p1(const Mesh& m, F&& f) {
    FieldP1 u(m.num_dofs());
    for (int a = 0; a < m.num_nodes(); ++a) {
        const auto v = f(m.node(a));
        for (int i = 0; i < m.dim(); ++i) u[a * m.dim() + i] = v[i];
    }
    return u;
}

double l2_norm_sq(const Mesh& m, const FieldP0& s);
double max_abs_trace(const FieldP0& s);

/// Discrete H^1 Gram matrix: lumped mass plus vector Laplacian.
SparseMatrix h1_gram(const Mesh& m);

/// Area-weighted averaging of cell values onto nodes (nodes x cells).
SparseMatrix nodal_recovery(const Mesh& m);
/// Per-cell derivative in direction k of a scalar P1 field (cells x nodes).
SparseMatrix cell_derivative(const Mesh& m, int k);

/// Second-derivative surrogate for P1 vector fields: the cell gradient of the
/// recovered nodal gradient, scaled by sqrt(|T|) so that |D u|^2 is the
/// squared L^2 norm of the recovered Hessian.
SparseMatrix recovered_hessian(const Mesh& m);

/// W^{1,p}-type norm of a P0 tensor field: the field itself in L^p plus the
/// L^p norm of the cell gradients of its nodal recovery.
double recovered_w1p_norm(const Mesh& m, const FieldP0& s, double p);

enum class LinearSolverKind { Cholesky, ConjugateGradient };

/// Elastic equilibrium on a fixed mesh and material:
///   int C (strain(u) - z) : strain(phi) = <ell, phi>  for phi = 0 on Gamma_D,
///   u = uD on Gamma_D.
/// The constrained stiffness is factorized once on construction; the object
/// is immutable afterwards and solve() may be called concurrently.
class EquilibriumSolver {
public:
    struct Solution {
        FieldP1 u;
        FieldP0 sigma;
    };

    EquilibriumSolver(const Mesh& mesh, const ElasticityTensor& elast,
                      LinearSolverKind kind = LinearSolverKind::Cholesky);
    ~EquilibriumSolver();
    EquilibriumSolver(const EquilibriumSolver&) = delete;
    EquilibriumSolver& operator=(const EquilibriumSolver&) = delete;

    const Mesh& mesh() const { return *mesh_; }
    const ElasticityTensor& elasticity() const { return elast_; }
    const SparseMatrix& stiffness() const { return K_; }
    const SparseMatrix& stiffness_free() const { return K_ff_; }  // rows and columns of free_dofs()

    Solution solve(const FieldP0& z, const FieldP1& uD, const LoadVector& ell) const;
    FieldP1 solve_displacement(const FieldP0& z, const FieldP1& uD, const LoadVector& ell) const;
    FieldP0 stress(const FieldP1& u, const FieldP0& z) const;

    // Free-dof residual K u - B z - ell, relative to the right-hand side size.
    double relative_residual(const FieldP1& u, const FieldP0& z, const LoadVector& ell) const;

    // Building blocks for adjoint sweeps.
    //   B z = sum_T |T| C z_T : strain(phi)
    LoadVector plastic_load(const FieldP0& z) const;
    //   B^T y, cell-wise |T| C strain(y)_T
    FieldP0 plastic_load_transpose(const FieldP1& y) const;
    // Solves K_II x = r on the free dofs; r and the result are full-length
    // vectors whose Dirichlet entries are ignored / returned as zero.
    FieldP1 solve_homogeneous(const FieldP1& r) const;
    // -K_DI y restricted to the Dirichlet dofs (zero elsewhere).
    FieldP1 lifting_transpose(const FieldP1& y) const;

    // ell^T K_II^{-1} ell on the free dofs.
    double dual_norm_sq(const LoadVector& ell) const;

    bool is_dirichlet_dof(int dof) const { return dirichlet_dof_[dof] != 0; }
    int num_free_dofs() const { return static_cast<int>(free_.size()); }
    const std::vector<int>& free_dofs() const { return free_; }
    const std::vector<int>& constrained_dofs() const { return fixed_; }

private:
    Eigen::VectorXd solve_free(const Eigen::VectorXd& rhs) const;

    std::shared_ptr<const Mesh> mesh_;
    ElasticityTensor elast_;
    LinearSolverKind kind_;
    SparseMatrix K_;
    SparseMatrix K_ff_;
    SparseMatrix K_fd_;
    std::vector<int> free_;
    std::vector<int> fixed_;
    std::vector<char> dirichlet_dof_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
};

// Stiffness of a single cell for (local node a, comp i) x (local node b, comp j).
SparseMatrix assemble_stiffness(const Mesh& m, const ElasticityTensor& e);

}  // namespace perfplast
