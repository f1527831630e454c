#include "dynbc/analysis.hpp"

#include <cmath>

#include "dynbc/quad.hpp"
#include "dynbc/special.hpp"

namespace dynbc {

namespace {

// <f, J_k> with f sampled through BoundaryFunction::value (interior only).
Vec2 pair_with_J(const BoundaryFunction& f, const RiccatiSolution& sol) {
    // panels aligned to the f grid so piecewise-linear data integrates cleanly
    const int panels = std::max(64, f.n());
    Vec2 acc{};
    const auto& g = quad::gauss_rule(4);
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double x = mid + 0.5 * h * g.nodes[i];
            const double w = 0.5 * h * g.weights[i];
            acc += sol.eval_J(x) * (w * f.value(x));
        }
    }
    return acc;
}

} // namespace

Vec2 defect(const BoundaryFunction& f, const RiccatiSolution& sol) {
    const Vec2 pj = pair_with_J(f, sol);
    return {f.f0() - pj.x0, f.f1() - pj.x1};
}

Vec2 defect_of_row(const SpaceTimeField& field, int row, const RiccatiSolution& sol) {
    return defect(field.row_as_function(row), sol);
}

DefectDecomposition decompose(const Vec2& d, const RiccatiSolution& sol) {
    const Mat22 V{sol.V0.x0, sol.V1.x0, sol.V0.x1, sol.V1.x1};
    const Vec2 a = V.solve(d);
    return {d, a.x0, a.x1};
}

ClosedForms closed_forms(const RiccatiSolution& sol) {
    const ModelParams p = sol.params;
    const double mu = p.mu;
    const double w0 = sol.omega0, w1 = sol.omega1;

    auto c_of = [&](double omega, int k) {
        const double root = std::sqrt(mu * mu * std::cosh(omega) * std::cosh(omega) + omega * omega - mu * mu);
        return ((k == 0 ? 1.0 : -1.0) * root - mu * std::cosh(omega)) / (omega + mu);
    };

    ClosedForms cf;
    cf.c0 = c_of(w0, 0);
    cf.c1 = c_of(w1, 1);

    const double c1 = cf.c1;
    cf.h1 = [c1, w1, mu](double x) {
        return (std::exp(x * w1) + c1 * std::exp((1.0 - x) * w1)) * std::exp(-x * mu);
    };
    cf.h1_prime = [c1, w1, mu](double x) {
        return ((w1 - mu) * std::exp(x * w1) - c1 * (w1 + mu) * std::exp((1.0 - x) * w1)) *
               std::exp(-x * mu);
    };

    switch (p.regime) {
        case Regime::Supercritical: {
            const double c0 = cf.c0;
            cf.h0 = [c0, w0, mu](double x) {
                return (std::exp(x * w0) + c0 * std::exp((1.0 - x) * w0)) * std::exp(-x * mu);
            };
            cf.h0_prime = [c0, w0, mu](double x) {
                return ((w0 - mu) * std::exp(x * w0) - c0 * (w0 + mu) * std::exp((1.0 - x) * w0)) *
                       std::exp(-x * mu);
            };
            break;
        }
        case Regime::Critical: {
            if (std::abs(mu) < 1e-12) {
                cf.h0 = [](double x) { return 1.0 - x * (1.0 - x); };
                cf.h0_prime = [](double x) { return 2.0 * x - 1.0; };
            } else {
                const double amp = (1.0 + std::tanh(mu)) / (2.0 * mu * mu);
                const double amu = std::abs(mu);
                cf.h0 = [amu, mu, amp](double x) {
                    return 1.0 / amu + x / mu + amp * std::exp(-2.0 * mu * x);
                };
                cf.h0_prime = [mu, amp](double x) {
                    return 1.0 / mu - 2.0 * mu * amp * std::exp(-2.0 * mu * x);
                };
            }
            break;
        }
        case Regime::Subcritical: {
            cf.h0 = [](double) { return 1.0; };
            cf.h0_prime = [](double) { return 0.0; };
            break;
        }
    }

    // K_k from K_k * D h_k = V_k, component-wise with a consistency check.
    auto k_from = [&](const std::function<double(double)>& h, double hb0, double hb1,
                      const Vec2& V) {
        const BoundaryFunction bf = BoundaryFunction::from_callable(h, hb0, hb1, 256);
        const Vec2 d = defect(bf, sol);
        const double k0 = V.x0 / d.x0;
        const double k1 = V.x1 / d.x1;
        if (std::abs(k0 - k1) > 1e-5 * (std::abs(k0) + std::abs(k1)))
            throw numerical_error("closed_forms: inconsistent K ratio (regime misclassified?)");
        return 0.5 * (k0 + k1);
    };
    cf.K0 = k_from(cf.h0, cf.h0(0.0), cf.h0(1.0), sol.V0);
    cf.K1 = k_from(cf.h1, cf.h1(0.0), cf.h1(1.0), sol.V1);
    if (!(cf.K0 > 0.0)) throw numerical_error("closed_forms: K0 must be positive");
    if (cf.K1 == 0.0) throw numerical_error("closed_forms: K1 must be nonzero");

    const double K0 = cf.K0, K1 = cf.K1;
    if (p.regime == Regime::Supercritical) {
        auto h0 = cf.h0;
        cf.g0 = [K0, h0](double x) { return K0 * h0(x); };
    } else {
        cf.g0 = [K0](double) { return K0; };
    }
    auto h1 = cf.h1;
    cf.g1 = [K1, h1](double x) { return K1 * h1(x); };
    return cf;
}

Classification classify_nonneg(const BoundaryFunction& f, const RiccatiSolution& sol, double tol) {
    const DefectDecomposition dd = decompose(defect(f, sol), sol);
    Classification c;
    c.a0 = dd.a0;
    c.a1 = dd.a1;
    c.min_f = std::min({f.interior_min(), f.f0(), f.f1()});
    const bool nonneg = c.min_f >= -tol && std::abs(dd.a1) <= tol * (1.0 + std::abs(dd.a0)) &&
                        dd.a0 >= -tol;
    c.verdict = nonneg ? Verdict::Nonnegative : Verdict::Indefinite;
    return c;
}

RateFit rate_fit(const SpaceTimeField& field, double t1, double t2, RateMode mode) {
    RateFit fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < field.rows(); ++i) {
        const double t = field.times[i];
        if (t < t1 || t > t2) continue;
        double y;
        if (mode == RateMode::log_sup) {
            const double s = field.row_sup(i);
            if (!(s > 0.0)) throw std::domain_error("rate_fit: nonpositive sup-norm in window");
            y = std::log(s);
        } else {
            if (!(t > 0.0)) continue;
            y = field.row_sup(i) / t;
        }
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++fit.points;
    }
    if (fit.points < 2) throw std::domain_error("rate_fit: window contains fewer than 2 rows");
    const double n = fit.points;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

Mat22 exp_minus_tB(const RiccatiSolution& sol, double t) {
    return sol.W.inverse() * Mat22::diag(std::exp(-t * sol.lambda0), std::exp(-t * sol.lambda1)) *
           sol.W;
}

} // namespace dynbc
