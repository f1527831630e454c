#include "dynbc/kernel.hpp"

#include <cmath>

#include "dynbc/quad.hpp"

namespace dynbc {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399;

double gauss_density(double t, double x) {
    return kInvSqrt2Pi / std::sqrt(t) * std::exp(-x * x / (2.0 * t));
}

} // namespace

void KernelConfig::validate() const {
    if (!(t_switch > 0.0)) throw std::invalid_argument("KernelConfig: t_switch must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("KernelConfig: tol must be positive");
    if (spatial_terms < 1 || spectral_terms < 1)
        throw std::invalid_argument("KernelConfig: truncation orders must be positive");

    // First omitted term of each representation at the crossover time. The
    // image sum is worst at x on the unit cell edge, the cosine series at
    // cos = 1. Factor 4 covers the alternating tail crudely but safely.
    const double img = 4.0 * gauss_density(t_switch, 2.0 * spatial_terms + 1.0);
    if (!(img <= tol))
        throw std::invalid_argument("KernelConfig: image truncation too coarse for tol at t_switch");
    const double n1 = (spectral_terms + 1.0) * M_PI;
    const double spec = 4.0 * std::exp(-n1 * n1 * t_switch / 2.0) * n1 * n1;
    if (!(spec <= tol))
        throw std::invalid_argument("KernelConfig: spectral truncation too coarse for tol at t_switch");
}

Kernel::Kernel(KernelConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Kernel::require_t(double t) const {
    if (!(t > 0.0)) throw std::domain_error("Kernel: time argument must be positive");
}

double Kernel::gauss(double t, double x) const {
    require_t(t);
    return gauss_density(t, x);
}

double Kernel::periodized_G(double t, double x, Deriv order) const {
    require_t(t);
    // Reduce to the fundamental cell [-1,1]; G and both derivatives are
    // 2-periodic so the reduction is exact.
    const double r = std::remainder(x, 2.0);

    if (t <= cfg_.t_switch) {
        double s = 0.0;
        for (int k = -cfg_.spatial_terms; k <= cfg_.spatial_terms; ++k) {
            const double z = r + 2.0 * k;
            const double g = gauss_density(t, z);
            switch (order) {
                case Deriv::value: s += g; break;
                case Deriv::d_dx: s += -z / t * g; break;
                case Deriv::d_dt: s += g * (z * z / (2.0 * t * t) - 0.5 / t); break;
            }
        }
        return s;
    }

    double s = (order == Deriv::value) ? 0.5 : 0.0;
    for (int n = 1; n <= cfg_.spectral_terms; ++n) {
        const double npi = n * M_PI;
        const double e = std::exp(-npi * npi * t / 2.0);
        if (e * npi * npi < 1e-2 * cfg_.tol) break;
        switch (order) {
            case Deriv::value: s += e * std::cos(npi * r); break;
            case Deriv::d_dx: s -= e * npi * std::sin(npi * r); break;
            case Deriv::d_dt: s -= e * 0.5 * npi * npi * std::cos(npi * r); break;
        }
    }
    return s;
}

double Kernel::q0(double t, double x, double mu) const {
    require_t(t);
    return -std::exp(-mu * x - mu * mu * t / 2.0) * periodized_G(t, x, Deriv::d_dx);
}

double Kernel::q1(double t, double x, double mu) const {
    require_t(t);
    return -std::exp(mu * (1.0 - x) - mu * mu * t / 2.0) * periodized_G(t, 1.0 - x, Deriv::d_dx);
}

double Kernel::absorbed(double t, double x, double y, double mu) const {
    require_t(t);
    const double pre = std::exp(mu * (y - x) - mu * mu * t / 2.0);
    if (t <= cfg_.t_switch) {
        return pre * (periodized_G(t, y - x) - periodized_G(t, y + x));
    }
    // Sine eigenexpansion: the 1/2 constants cancel exactly and so would
    // otherwise be lost to rounding when both G values are near 1/2.
    double s = 0.0;
    for (int n = 1; n <= cfg_.spectral_terms; ++n) {
        const double npi = n * M_PI;
        const double e = std::exp(-npi * npi * t / 2.0);
        if (e < 1e-2 * cfg_.tol) break;
        s += 2.0 * e * std::sin(npi * x) * std::sin(npi * y);
    }
    return pre * s;
}

double Kernel::mass_identity_residual(double t, double x, double mu) const {
    require_t(t);
    const double interior =
        quad::adaptive([&](double y) { return absorbed(t, x, y, mu); }, 0.0, 1.0, 1e-12);
    const double hit0 =
        quad::integrate_sqrt_sub([&](double tau) { return q0(tau, x, mu); }, t, 1e-12);
    const double hit1 =
        quad::integrate_sqrt_sub([&](double tau) { return q1(tau, x, mu); }, t, 1e-12);
    return std::abs(interior + hit0 + hit1 - 1.0);
}

} // namespace dynbc
