// Small symmetric tensors and the isotropic elasticity map.
//
// Component order of a SymTensor is fixed and used by every file format:
//   dim 1: s00
//   dim 2: s00 s11 s01
//   dim 3: s00 s11 s22 s01 s02 s12
// i.e. the diagonal first, then the strict upper triangle row by row.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace perfplast {

class SymTensor {
public:
    static constexpr int kMaxComponents = 6;

    SymTensor() = default;
    explicit SymTensor(int dim);

    static SymTensor zero(int dim) { return SymTensor(dim); }
    static SymTensor identity(int dim);
    static SymTensor diag(std::span<const double> d);
    // Components in canonical order; size must be dim(dim+1)/2.
    static SymTensor from_components(int dim, std::span<const double> c);

    int dim() const { return dim_; }
    int size() const { return num_components(dim_); }

    static constexpr int num_components(int dim) { return dim * (dim + 1) / 2; }
    // Canonical index of entry (i, j); symmetric in its arguments.
    static int index(int dim, int i, int j);

    double operator()(int i, int j) const { return c_[index(dim_, i, j)]; }
    void set(int i, int j, double v) { c_[index(dim_, i, j)] = v; }

    double& operator[](int k) { return c_[k]; }
    double operator[](int k) const { return c_[k]; }
    std::span<const double> components() const { return {c_.data(), static_cast<std::size_t>(size())}; }

    double trace() const;

    SymTensor& operator+=(const SymTensor& o);
    SymTensor& operator-=(const SymTensor& o);
    SymTensor& operator*=(double s);

    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
    friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
    friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
    friend SymTensor operator-(SymTensor a) { return a *= -1.0; }

    bool operator==(const SymTensor& o) const = default;

private:
    int dim_ = 1;
    std::array<double, kMaxComponents> c_{};
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

SymTensor deviator(const SymTensor& t);
// Spherical part (tr t / dim) I.
SymTensor spherical(const SymTensor& t);

// Full double contraction A:B; off-diagonal entries count twice.
double frob_inner(const SymTensor& a, const SymTensor& b);
double frob_norm(const SymTensor& t);

// sym(a (x) b) for vectors of length dim.
SymTensor sym_outer(int dim, std::span<const double> a, std::span<const double> b);

/// Constant isotropic elasticity tensor C e = 2 mu e + lambda tr(e) I and its
/// inverse A = C^{-1}.
struct ElasticityTensor {
    double lame_lambda = 0.0;
    double lame_mu = 0.5;

    ElasticityTensor() = default;
    ElasticityTensor(double lambda, double mu);

    // Lower bound <C e, e> >= gamma_C |e|^2.
    double coercivity_C() const { return 2.0 * lame_mu; }
    // Lower bound <A s, s> >= gamma_A |s|^2 in dimension n.
    double coercivity_A(int dim) const { return 1.0 / (2.0 * lame_mu + dim * lame_lambda); }
    // Operator norm of C in the Frobenius inner product.
    double norm_C(int dim) const { return 2.0 * lame_mu + dim * lame_lambda; }
};

SymTensor apply_C(const ElasticityTensor& e, const SymTensor& strain);
SymTensor apply_A(const ElasticityTensor& e, const SymTensor& stress);

std::string to_string(const SymTensor& t);

}  // namespace perfplast
