#include "perfplast/tensor.hpp"

#include <cmath>
#include <sstream>

namespace perfplast {

SymTensor::SymTensor(int dim) : dim_(dim) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("SymTensor: dimension must be 1, 2 or 3, got " + std::to_string(dim));
    }
}

SymTensor SymTensor::identity(int dim) {
    SymTensor t(dim);
    for (int i = 0; i < dim; ++i) t.c_[i] = 1.0;
    return t;
}

SymTensor SymTensor::diag(std::span<const double> d) {
    SymTensor t(static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) t.c_[i] = d[i];
    return t;
}

SymTensor SymTensor::from_components(int dim, std::span<const double> c) {
    SymTensor t(dim);
    if (static_cast<int>(c.size()) != num_components(dim)) {
        throw DimensionMismatch("SymTensor::from_components: expected " + std::to_string(num_components(dim)) +
                                " components, got " + std::to_string(c.size()));
    }
    for (std::size_t i = 0; i < c.size(); ++i) t.c_[i] = c[i];
    return t;
}

int SymTensor::index(int dim, int i, int j) {
    if (i == j) return i;
    if (i > j) std::swap(i, j);
    // Off-diagonals follow the diagonal, row-major over the strict upper triangle.
    if (dim == 2) return 2;
    // dim 3: (0,1)->3, (0,2)->4, (1,2)->5
    return 3 + i + j - 1;
}

double SymTensor::trace() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i];
    return s;
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
    if (o.dim_ != dim_) throw DimensionMismatch("SymTensor: dimension mismatch in +");
    for (int k = 0; k < size(); ++k) c_[k] += o.c_[k];
    return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
    if (o.dim_ != dim_) throw DimensionMismatch("SymTensor: dimension mismatch in -");
    for (int k = 0; k < size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

SymTensor& SymTensor::operator*=(double s) {
    for (int k = 0; k < size(); ++k) c_[k] *= s;
    return *this;
}

SymTensor spherical(const SymTensor& t) {
    return SymTensor::identity(t.dim()) * (t.trace() / t.dim());
}

SymTensor deviator(const SymTensor& t) {
    SymTensor d = t;
    const double m = t.trace() / t.dim();
    for (int i = 0; i < t.dim(); ++i) d[i] -= m;
    return d;
}

double frob_inner(const SymTensor& a, const SymTensor& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("frob_inner: dimensions " + std::to_string(a.dim()) + " and " +
                                std::to_string(b.dim()));
    }
    double s = 0.0;
    const int n = a.dim();
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    for (int k = n; k < a.size(); ++k) s += 2.0 * a[k] * b[k];
    return s;
}

double frob_norm(const SymTensor& t) { return std::sqrt(frob_inner(t, t)); }

SymTensor sym_outer(int dim, std::span<const double> a, std::span<const double> b) {
    SymTensor t(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) t.set(i, j, 0.5 * (a[i] * b[j] + a[j] * b[i]));
    }
    return t;
}

ElasticityTensor::ElasticityTensor(double lambda, double mu) : lame_lambda(lambda), lame_mu(mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("ElasticityTensor: lame_mu must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("ElasticityTensor: lame_lambda must be non-negative");
}

SymTensor apply_C(const ElasticityTensor& e, const SymTensor& strain) {
    SymTensor s = strain * (2.0 * e.lame_mu);
    const double vol = e.lame_lambda * strain.trace();
    for (int i = 0; i < strain.dim(); ++i) s[i] += vol;
    return s;
}

SymTensor apply_A(const ElasticityTensor& e, const SymTensor& stress) {
    const int n = stress.dim();
    const double two_mu = 2.0 * e.lame_mu;
    SymTensor s = stress * (1.0 / two_mu);
    const double vol = e.lame_lambda * stress.trace() / (two_mu * (two_mu + n * e.lame_lambda));
    for (int i = 0; i < n; ++i) s[i] -= vol;
    return s;
}

std::string to_string(const SymTensor& t) {
    std::ostringstream os;
    os.precision(17);
    os << "SymTensor(" << t.dim() << ";";
    for (int k = 0; k < t.size(); ++k) os << (k ? ", " : " ") << t[k];
    os << ")";
    return os.str();
}

}  // namespace perfplast
