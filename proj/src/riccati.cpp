#include "dynbc/riccati.hpp"

#include <cmath>
#include <sstream>

#include "dynbc/kernel.hpp"
#include "dynbc/quad.hpp"
#include "dynbc/special.hpp"

namespace dynbc {

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Supercritical: return "Supercritical";
        case Regime::Critical: return "Critical";
        case Regime::Subcritical: return "Subcritical";
    }
    return "?";
}

ModelParams ModelParams::make(double mu, double sigma, std::optional<Regime> force) {
    if (!(sigma > 0.0)) throw std::invalid_argument("ModelParams: sigma must be positive");
    ModelParams p;
    p.mu = mu;
    p.sigma = sigma;
    if (force) {
        p.regime = *force;
        return p;
    }
    const double gap = sigma - mu_coth_mu(mu);
    if (gap > kRegimeTol)
        p.regime = Regime::Supercritical;
    else if (gap < -kRegimeTol)
        p.regime = Regime::Subcritical;
    else
        p.regime = Regime::Critical;
    return p;
}

namespace {

// sqrt(mu^2 + omega^2/sinh^2(omega))
double radical(double omega, double mu) {
    const double os = omega_over_sinh(omega);
    return std::hypot(mu, os);
}

} // namespace

// g1 = omega^2 - mu^2 - 2 sigma [omega coth omega + radical]; both bracket
// terms are positive so the subtraction is benign.
double char_g1(double omega, const ModelParams& p) {
    return omega * omega - p.mu * p.mu -
           2.0 * p.sigma * (mu_coth_mu(omega) + radical(omega, p.mu));
}

// g0 = omega^2 - mu^2 - 2 sigma [omega coth omega - radical]. Rationalizing
// the bracket with coth^2 - 1/sinh^2 = 1 gives the factored form below, which
// vanishes identically at omega = |mu| instead of by cancellation.
double char_g0(double omega, const ModelParams& p) {
    const double denom = mu_coth_mu(omega) + radical(omega, p.mu);
    return (omega * omega - p.mu * p.mu) * (1.0 - 2.0 * p.sigma / denom);
}

OmegaPair solve_omegas(const ModelParams& p) {
    const double amu = std::abs(p.mu);

    auto bisect = [](auto&& f, double lo, double hi, const char* what) {
        double flo = f(lo);
        double fhi = f(hi);
        if (flo == 0.0) return lo;
        if (fhi == 0.0) return hi;
        if ((flo > 0.0) == (fhi > 0.0)) {
            std::ostringstream os;
            os << "solve_omegas: no sign change for " << what << " on [" << lo << ", " << hi
               << "], f = (" << flo << ", " << fhi << ")";
            throw numerical_error(os.str());
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if (hi - lo <= 1e-13 * (1.0 + hi)) break;
        }
        return 0.5 * (lo + hi);
    };

    // omega1: g1 < 0 on (0, omega1), > 0 beyond, with a single sign change.
    auto g1 = [&](double w) { return char_g1(w, p); };
    double hi = std::max(amu, 2.0 * p.sigma) + 1.0;
    int guard = 0;
    while (g1(hi) <= 0.0) {
        hi *= 2.0;
        if (++guard > 60) throw numerical_error("solve_omegas: bracket doubling for omega1 failed");
    }
    const double omega1 = bisect(g1, 1e-12, hi, "omega1");

    double omega0 = amu;
    if (p.regime == Regime::Supercritical) {
        auto g0 = [&](double w) { return char_g0(w, p); };
        const double eps = 1e-8 * (1.0 + amu);
        omega0 = bisect(g0, amu + eps, omega1, "omega0");
    }
    return {omega0, omega1};
}

Mat22 left_eigenrows(const ModelParams& p, double omega0, double omega1) {
    const double emu = std::exp(p.mu);
    // sinh(omega)/omega = 1/omega_over_sinh, kept safe at small omega.
    auto row_ratio = [&](double omega, double sign) {
        return (sign * radical(omega, p.mu) + p.mu) * emu / omega_over_sinh(omega);
    };
    const double r0 = row_ratio(omega0, +1.0);
    const double r1 = row_ratio(omega1, -1.0);
    Mat22 W{1.0, r0, 1.0, r1};
    if (!(std::abs(W.det()) > 1e-10 * W.max_abs() * W.max_abs()))
        throw numerical_error("left_eigenrows: eigenrow matrix numerically singular");
    return W;
}

Mat22 b_of_j(const ModelParams& p, const Vec2& jprime0, const Vec2& jprime1) {
    return {-2.0 * p.mu * p.sigma + 0.5 * jprime0.x0, -0.5 * jprime1.x0,
            0.5 * jprime0.x1, 2.0 * p.mu * p.sigma - 0.5 * jprime1.x1};
}

Vec2 RiccatiSolution::eval_J(double x) const {
    const double r0 = W.a01, r1 = W.a11;
    const double delta = r1 - r0;
    const double emx = std::exp(params.mu * x);
    const double emm = std::exp(-params.mu);
    const double a0 = ratio_sinh(1.0 - x, omega0);
    const double a1 = ratio_sinh(1.0 - x, omega1);
    const double s0 = ratio_sinh(x, omega0);
    const double s1 = ratio_sinh(x, omega1);
    const double pre = 2.0 * params.sigma * emx / delta;
    return {pre * (r1 * a0 - r0 * a1 + emm * r0 * r1 * (s0 - s1)),
            pre * ((a1 - a0) + emm * (r1 * s1 - r0 * s0))};
}

Vec2 RiccatiSolution::eval_J_prime(double x) const {
    const double r0 = W.a01, r1 = W.a11;
    const double delta = r1 - r0;
    const double emx = std::exp(params.mu * x);
    const double emm = std::exp(-params.mu);
    const double da0 = -dratio_sinh(1.0 - x, omega0);
    const double da1 = -dratio_sinh(1.0 - x, omega1);
    const double ds0 = dratio_sinh(x, omega0);
    const double ds1 = dratio_sinh(x, omega1);
    const double pre = 2.0 * params.sigma * emx / delta;
    const Vec2 inner{pre * (r1 * da0 - r0 * da1 + emm * r0 * r1 * (ds0 - ds1)),
                     pre * ((da1 - da0) + emm * (r1 * ds1 - r0 * ds0))};
    return params.mu * eval_J(x) + inner;
}

RiccatiSolution solve_riccati(const ModelParams& p) {
    RiccatiSolution sol;
    sol.params = p;
    const auto [w0, w1] = solve_omegas(p);
    sol.omega0 = w0;
    sol.omega1 = w1;
    sol.W = left_eigenrows(p, w0, w1);
    sol.lambda0 = (p.mu * p.mu - w0 * w0) / 2.0;
    sol.lambda1 = (p.mu * p.mu - w1 * w1) / 2.0;

    // B = W^-1 diag(lambda) W; the W^-1 columns are the right eigenvectors,
    // rescaled to the sum/difference normalizations.
    const double r0 = sol.W.a01, r1 = sol.W.a11;
    sol.B = sol.W.inverse() * Mat22::diag(sol.lambda0, sol.lambda1) * sol.W;
    sol.V0 = Vec2{r1, -1.0} * (1.0 / (r1 - 1.0));
    sol.V1 = Vec2{-r0, 1.0} * (1.0 / (-r0 - 1.0));
    if (!(sol.V0.x0 > 0.0 && sol.V0.x1 > 0.0))
        throw numerical_error("solve_riccati: V0 not strictly positive");
    if (!(sol.V1.x0 > 0.0 && sol.V1.x1 < 0.0))
        throw numerical_error("solve_riccati: V1 sign convention violated");

    sol.masses = masses_of(sol);
    sol.mJ = std::max(sol.masses.x0, sol.masses.x1);
    return sol;
}

Vec2 masses_of(const RiccatiSolution& sol) {
    // J is entire; a modest composite rule reaches 1e-14 here.
    const int panels = 16;
    double m0 = quad::composite_gauss([&](double x) { return sol.eval_J(x).x0; }, 0.0, 1.0, panels, 12);
    double m1 = quad::composite_gauss([&](double x) { return sol.eval_J(x).x1; }, 0.0, 1.0, panels, 12);
    return {m0, m1};
}

} // namespace dynbc
