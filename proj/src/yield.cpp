#include "perfplast/yield.hpp"

#include <cmath>
#include <stdexcept>

namespace perfplast {

namespace {

void require_lambda(const RegularizationParams& rp, const char* where) {
    if (!(rp.lambda > 0.0)) {
        throw std::invalid_argument(std::string(where) + ": lambda must be positive");
    }
}

// The band must stay away from r = 0 where the direction is undefined.
void require_band(const YieldSet& ys, const RegularizationParams& rp, const char* where) {
    if (!(rp.huber_eps > 0.0) || !(rp.huber_eps < ys.sigma_y)) {
        throw std::invalid_argument(std::string(where) + ": huber_eps must lie in (0, sigma_y)");
    }
}

void require_dim(const YieldSet& ys, const SymTensor& t) {
    if (ys.kind == YieldKind::Uniaxial && t.dim() != 1) {
        throw DimensionMismatch("uniaxial yield set is only defined for dim 1");
    }
}

// Decompose t = rest + r n with n the unit direction of the constrained part.
struct Radial {
    SymTensor rest;
    SymTensor dir;  // zero when r == 0
    double r = 0.0;
};

Radial radial_split(const YieldSet& ys, const SymTensor& t) {
    require_dim(ys, t);
    Radial out;
    const SymTensor c = ys.constrained_part(t);
    out.rest = t - c;
    out.r = frob_norm(c);
    out.dir = out.r > 0.0 ? c * (1.0 / out.r) : SymTensor::zero(t.dim());
    return out;
}

// Von Mises outputs live in the deviatoric subspace; rounding in the radial
// scaling would otherwise leave a trace of order eps |t| / lambda.
SymTensor trace_free(const YieldSet& ys, SymTensor v) {
    if (ys.kind != YieldKind::VonMises) return v;
    const int n = v.dim();
    double s = 0.0;
    for (int i = 0; i + 1 < n; ++i) s += v[i];
    v[n - 1] = -s;
    return v;
}

}  // namespace

YieldSet YieldSet::von_mises(double sigma_y) {
    if (!(sigma_y > 0.0)) throw std::invalid_argument("YieldSet: sigma_y must be positive");
    return {sigma_y, YieldKind::VonMises};
}

YieldSet YieldSet::uniaxial(double sigma_y) {
    if (!(sigma_y > 0.0)) throw std::invalid_argument("YieldSet: sigma_y must be positive");
    return {sigma_y, YieldKind::Uniaxial};
}

SymTensor YieldSet::constrained_part(const SymTensor& t) const {
    return kind == YieldKind::VonMises ? deviator(t) : t;
}

bool YieldSet::contains(const SymTensor& t, double rel_slack) const {
    return frob_norm(constrained_part(t)) <= sigma_y * (1.0 + rel_slack);
}

SymTensor project_K(const YieldSet& ys, const SymTensor& t) {
    const Radial rad = radial_split(ys, t);
    if (rad.r <= ys.sigma_y) return t;
    return rad.rest + rad.dir * ys.sigma_y;
}

double yosida_value(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t) {
    require_lambda(rp, "yosida_value");
    const SymTensor d = t - project_K(ys, t);
    return frob_inner(d, d) / (2.0 * rp.lambda);
}

SymTensor yosida_deriv(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t) {
    require_lambda(rp, "yosida_deriv");
    const Radial rad = radial_split(ys, t);
    if (rad.r <= ys.sigma_y) return SymTensor::zero(t.dim());
    return trace_free(ys, rad.dir * ((rad.r - ys.sigma_y) / rp.lambda));
}

double smoothed_magnitude(double r, double sigma_y, double lambda, double eps) {
    if (r <= sigma_y - eps) return 0.0;
    if (r >= sigma_y + eps) return (r - sigma_y) / lambda;
    const double s = r - sigma_y + eps;
    return s * s / (4.0 * eps) / lambda;
}

double smoothed_magnitude_slope(double r, double sigma_y, double lambda, double eps) {
    if (r <= sigma_y - eps) return 0.0;
    if (r >= sigma_y + eps) return 1.0 / lambda;
    return (r - sigma_y + eps) / (2.0 * eps) / lambda;
}

SymTensor yosida_deriv_smoothed(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t) {
    require_lambda(rp, "yosida_deriv_smoothed");
    require_band(ys, rp, "yosida_deriv_smoothed");
    const Radial rad = radial_split(ys, t);
    return trace_free(ys, rad.dir * smoothed_magnitude(rad.r, ys.sigma_y, rp.lambda, rp.huber_eps));
}

SymTensor yosida_deriv_smoothed_jvp(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t,
                                    const SymTensor& h) {
    require_lambda(rp, "yosida_deriv_smoothed_jvp");
    require_band(ys, rp, "yosida_deriv_smoothed_jvp");
    const Radial rad = radial_split(ys, t);
    const double m = smoothed_magnitude(rad.r, ys.sigma_y, rp.lambda, rp.huber_eps);
    if (rad.r <= ys.sigma_y - rp.huber_eps) return SymTensor::zero(t.dim());
    const double dm = smoothed_magnitude_slope(rad.r, ys.sigma_y, rp.lambda, rp.huber_eps);
    const SymTensor hc = ys.constrained_part(h);
    const double hn = frob_inner(rad.dir, hc);
    // m'(r) (n:h) n + m(r)/r (h_K - (n:h) n)
    return trace_free(ys, rad.dir * (dm * hn) + (hc - rad.dir * hn) * (m / rad.r));
}

}  // namespace perfplast
