// Yield set projection and the Yosida regularization of its indicator.
#pragma once

#include "perfplast/tensor.hpp"

namespace perfplast {

enum class YieldKind {
    // |t^D|_F <= sigma_y; the spherical part is unconstrained.
    VonMises,
    // |t| <= sigma_y on the full scalar stress of a 1D bar.
    Uniaxial,
};

struct YieldSet {
    double sigma_y = 1.0;
    YieldKind kind = YieldKind::VonMises;

    static YieldSet von_mises(double sigma_y);
    static YieldSet uniaxial(double sigma_y);

    // The part of a tensor the yield condition acts on: t^D for von Mises,
    // t itself for the uniaxial bar.
    SymTensor constrained_part(const SymTensor& t) const;
    bool contains(const SymTensor& t, double rel_slack = 0.0) const;
};

struct RegularizationParams {
    double lambda = 0.0;     // 0 is the unregularized indicator
    double huber_eps = 0.0;  // 0 means no smoothing of the Yosida derivative
};

SymTensor project_K(const YieldSet& ys, const SymTensor& t);

// (1 / 2 lambda) |t - pi_K(t)|^2
double yosida_value(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t);

// (t - pi_K(t)) / lambda
SymTensor yosida_deriv(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t);

/// C^1 replacement of yosida_deriv. Along the direction n = t_K / |t_K| the
/// radial magnitude r = |t_K| is mapped to
///   0                                  r <= sigma_y - eps
///   (r - sigma_y + eps)^2 / (4 eps) / lambda   on the band
///   (r - sigma_y) / lambda             r >= sigma_y + eps
SymTensor yosida_deriv_smoothed(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t);

// Radial magnitude of the smoothed map and its derivative in r.
double smoothed_magnitude(double r, double sigma_y, double lambda, double eps);
double smoothed_magnitude_slope(double r, double sigma_y, double lambda, double eps);

/// Directional derivative of yosida_deriv_smoothed at t applied to h. The
/// Jacobian is symmetric in the Frobenius inner product, so this also serves
/// as its transpose in adjoint sweeps.
SymTensor yosida_deriv_smoothed_jvp(const YieldSet& ys, const RegularizationParams& rp, const SymTensor& t,
                                    const SymTensor& h);

}  // namespace perfplast
