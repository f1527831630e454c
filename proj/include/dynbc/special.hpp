#ifndef DYNBC_SPECIAL_HPP
#define DYNBC_SPECIAL_HPP

#include <cmath>

// Small-argument-safe evaluations of the hyperbolic ratios used throughout.
// All are even in omega except where noted; series branches keep the critical
// mu = 0 / omega = 0 corners free of cancellation.

namespace dynbc {

// mu * coth(mu), with the convention value 1 at mu = 0.
inline double mu_coth_mu(double mu) {
    const double a = std::abs(mu);
    if (a < 1e-4) {
        const double m2 = mu * mu;
        return 1.0 + m2 / 3.0 - m2 * m2 / 45.0;
    }
    if (a > 20.0) {
        const double e = std::exp(-2.0 * a);
        return a * (1.0 + e) / (1.0 - e);
    }
    return mu / std::tanh(mu);
}

// omega / sinh(omega), value 1 at omega = 0.
inline double omega_over_sinh(double omega) {
    const double a = std::abs(omega);
    if (a < 1e-4) {
        const double w2 = omega * omega;
        return 1.0 - w2 / 6.0 + 7.0 * w2 * w2 / 360.0;
    }
    if (a > 20.0) {
        const double e = std::exp(-a);
        return 2.0 * a * e / (1.0 - e * e);
    }
    return omega / std::sinh(omega);
}

// sinh(z * omega) / sinh(omega) for z in [0,1]; limit z at omega = 0.
inline double ratio_sinh(double z, double omega) {
    const double a = std::abs(omega);
    if (a < 1e-6) {
        return z * (1.0 + omega * omega * (z * z - 1.0) / 6.0);
    }
    if (a > 20.0) {
        // e^{omega(z-1)} (1 - e^{-2 z omega}) / (1 - e^{-2 omega}), overflow-safe
        return std::exp(a * (z - 1.0)) * (1.0 - std::exp(-2.0 * z * a)) / (1.0 - std::exp(-2.0 * a));
    }
    return std::sinh(z * omega) / std::sinh(omega);
}

// d/dz of ratio_sinh: omega * cosh(z * omega) / sinh(omega); limit 1 at omega = 0.
inline double dratio_sinh(double z, double omega) {
    const double a = std::abs(omega);
    if (a < 1e-6) {
        return 1.0 + omega * omega * (3.0 * z * z - 1.0) / 6.0;
    }
    if (a > 20.0) {
        return a * std::exp(a * (z - 1.0)) * (1.0 + std::exp(-2.0 * z * a)) / (1.0 - std::exp(-2.0 * a));
    }
    return omega * std::cosh(z * omega) / std::sinh(omega);
}

} // namespace dynbc

#endif
