#ifndef DYNBC_QUAD_HPP
#define DYNBC_QUAD_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynbc::quad {

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
// iteration on the Legendre polynomial (accurate to machine precision for the
// small orders used here).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussRule(int n) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double p0 = 0.0, p1 = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                const double dp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            const double dp = n * (x * p0 - p1) / (x * x - 1.0);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussRule& gauss_rule(int n) {
    static const GaussRule g4(4), g6(6), g8(8), g10(10), g12(12), g16(16), g20(20), g24(24), g32(32);
    switch (n) {
        case 4: return g4;
        case 6: return g6;
        case 8: return g8;
        case 10: return g10;
        case 12: return g12;
        case 16: return g16;
        case 20: return g20;
        case 24: return g24;
        case 32: return g32;
        default: throw std::invalid_argument("gauss_rule: unsupported order " + std::to_string(n));
    }
}

// Single-panel Gauss-Legendre.
template <typename F>
double gauss(F&& f, double a, double b, int n = 10) {
    const GaussRule& g = gauss_rule(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        s += g.weights[i] * f(mid + half * g.nodes[i]);
    return s * half;
}

// Composite Gauss-Legendre over uniform panels.
template <typename F>
double composite_gauss(F&& f, double a, double b, int panels, int n = 10) {
    double s = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        s += gauss(f, a + p * h, a + (p + 1) * h, n);
    return s;
}

namespace detail {

// Adaptive bisection with an embedded G7/K15-style error estimate built from
// two Gauss orders (G8 vs G16); plenty for the smooth-after-substitution
// integrands that show up here.
template <typename F>
double adaptive_rec(F& f, double a, double b, double tol, int depth, double whole, int max_depth) {
    const double mid = 0.5 * (a + b);
    const double left = gauss(f, a, mid, 16);
    const double right = gauss(f, mid, b, 16);
    const double err = std::abs(left + right - whole);
    if (err <= tol || depth >= max_depth) {
        if (depth >= max_depth && err > 64.0 * tol)
            throw numerical_error("adaptive quadrature: no convergence, residual estimate " + std::to_string(err));
        return left + right;
    }
    return adaptive_rec(f, a, mid, 0.5 * tol, depth + 1, left, max_depth) +
           adaptive_rec(f, mid, b, 0.5 * tol, depth + 1, right, max_depth);
}

} // namespace detail

template <typename F>
double adaptive(F&& f, double a, double b, double tol = 1e-11, int max_depth = 48) {
    if (!(b > a)) return 0.0;
    const double whole = gauss(f, a, b, 16);
    return detail::adaptive_rec(f, a, b, tol, 0, whole, max_depth);
}

// \int_0^t f(tau) dtau with an integrable boundary layer at tau = 0, via the
// substitution tau = s^2.
template <typename F>
double integrate_sqrt_sub(F&& f, double t, double tol = 1e-11) {
    if (!(t > 0.0)) return 0.0;
    auto g = [&](double s) { return 2.0 * s * f(s * s); };
    return adaptive(g, 0.0, std::sqrt(t), tol);
}

} // namespace dynbc::quad

#endif
