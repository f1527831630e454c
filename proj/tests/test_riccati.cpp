#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dynbc/quad.hpp"
#include "dynbc/riccati.hpp"
#include "dynbc/special.hpp"

using namespace dynbc;

namespace {

// test-side bisection oracle
double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("mu coth mu") {
    CHECK(mu_coth_mu(0.0) == 1.0);
    const double coth1 = (std::exp(2.0) + 1.0) / (std::exp(2.0) - 1.0);
    CHECK(mu_coth_mu(1.0) == doctest::Approx(coth1).epsilon(1e-12));
    CHECK(mu_coth_mu(1.0) == doctest::Approx(1.3130352854993312).epsilon(1e-9));
    for (double mu : {0.3, 1.7, 5.0, 30.0}) CHECK(mu_coth_mu(mu) == mu_coth_mu(-mu));
    CHECK(mu_coth_mu(1e-8) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("characteristic functions") {
    const ModelParams p = ModelParams::make(1.0, 0.7);
    CHECK(std::abs(char_g0(1.0, p)) < 1e-12);  // |mu| always solves the plus branch

    // mu = 0, sigma = 1: the minus branch reduces to omega = 2 coth(omega/2)
    const ModelParams c = ModelParams::make(0.0, 1.0);
    const double w1_oracle =
        bisect([](double w) { return w - 2.0 / std::tanh(w / 2.0); }, 1.0, 10.0);
    CHECK(char_g1(w1_oracle, c) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(w1_oracle == doctest::Approx(2.3994).epsilon(1e-4));

    // critical: no interior root of the plus branch below omega1
    for (int i = 1; i <= 400; ++i) {
        const double w = w1_oracle * i / 401.0;
        CHECK(char_g0(w, c) > 0.0);
    }
}

TEST_CASE("root solving across regimes") {
    {
        const auto [w0, w1] = solve_omegas(ModelParams::make(0.0, 1.0));
        CHECK(w0 == 0.0);
        CHECK(w1 == doctest::Approx(2.3994).epsilon(2e-4));
    }
    {
        const auto [w0, w1] = solve_omegas(ModelParams::make(0.0, 2.0));
        const double w0_oracle = bisect([](double w) { return w - 4.0 * std::tanh(w / 2.0); }, 1.0, 10.0);
        const double w1_oracle = bisect([](double w) { return w - 4.0 / std::tanh(w / 2.0); }, 1.0, 10.0);
        CHECK(w0 == doctest::Approx(w0_oracle).epsilon(1e-10));
        CHECK(w1 == doctest::Approx(w1_oracle).epsilon(1e-10));
        CHECK(w0 == doctest::Approx(3.830).epsilon(1e-3));
        CHECK(w1 == doctest::Approx(4.131).epsilon(1e-3));
    }
    {
        const auto [w0, w1] = solve_omegas(ModelParams::make(1.0, 0.5));
        CHECK(w0 == 1.0);  // subcritical: sigma = 0.5 < coth 1
        CHECK(w1 > 1.0);
    }
    // uniqueness scan: exactly one sign change of the minus branch
    for (auto [mu, sigma] : {std::pair{0.0, 1.0}, {1.0, 2.0}, {-1.0, 0.5}}) {
        const ModelParams p = ModelParams::make(mu, sigma);
        const double hi = 50.0 * (1.0 + sigma + std::abs(mu));
        int changes = 0;
        double prev = char_g1(hi * 1e-4, p);
        for (int i = 2; i <= 10000; ++i) {
            const double cur = char_g1(hi * i * 1e-4, p);
            if ((cur > 0) != (prev > 0)) ++changes;
            prev = cur;
        }
        CHECK(changes == 1);
    }
}

TEST_CASE("left eigenrows") {
    {
        // at omega0 = |mu| the first row ratio is e^{2 mu}
        const Mat22 W = left_eigenrows(ModelParams::make(1.0, 0.5), 1.0, 2.0);
        CHECK(W.a01 == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    }
    {
        const Mat22 W = left_eigenrows(ModelParams::make(0.0, 1.0), 0.0, 2.3994);
        CHECK(W.a01 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(W.a11 == doctest::Approx(-1.0).epsilon(1e-12));
    }
    // the two printed reciprocal forms of the row ratio multiply to 1
    for (auto [mu, sigma] : {std::pair{0.3, 1.2}, {1.0, 2.0}, {-0.7, 0.6}}) {
        const ModelParams p = ModelParams::make(mu, sigma);
        const auto [w0, w1] = solve_omegas(p);
        const Mat22 W = left_eigenrows(p, w0, w1);
        auto recip = [&](double omega, double sign) {
            const double rad = std::sqrt(mu * mu + std::pow(omega_over_sinh(omega), 2));
            return (sign * rad - mu) * std::exp(-mu) / omega_over_sinh(omega);
        };
        CHECK(W.a01 * recip(w0, +1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(W.a11 * recip(w1, -1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("vector density J: boundary values, positivity, residual") {
    const RiccatiSolution sol = solve_riccati(ModelParams::make(1.0, 2.0));
    const Vec2 J0 = sol.eval_J(0.0);
    const Vec2 J1 = sol.eval_J(1.0);
    CHECK(J0.x0 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(J0.x1) < 1e-12);
    CHECK(std::abs(J1.x0) < 1e-12);
    CHECK(J1.x1 == doctest::Approx(4.0).epsilon(1e-12));

    for (auto [mu, sigma] : {std::pair{0.0, 2.0}, {0.0, 1.0}, {1.0, 0.5}, {-1.0, 2.0}}) {
        const RiccatiSolution s = solve_riccati(ModelParams::make(mu, sigma));
        for (int i = 0; i <= 1000; ++i) {
            const Vec2 J = s.eval_J(i / 1000.0);
            CHECK(J.x0 >= -1e-10);
            CHECK(J.x1 >= -1e-10);
        }
    }

    // residual of the system via 5-point differences on the closed form
    const double h = 1e-3;
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = i * h;
        Vec2 f[5];
        for (int s = -2; s <= 2; ++s) f[s + 2] = sol.eval_J(x + s * h);
        const Vec2 d1 = (f[0] - f[4] + (f[3] - f[1]) * 8.0) * (1.0 / (12.0 * h));
        const Vec2 d2 =
            ((f[1] + f[3]) * 16.0 - (f[0] + f[4]) - f[2] * 30.0) * (1.0 / (12.0 * h * h));
        const Vec2 res = d2 * 0.5 - d1 * sol.params.mu + sol.B * f[2];
        worst = std::max(worst, res.max_abs());
    }
    CHECK(worst < 1e-7);

    // analytic J' against a central difference
    for (double x : {0.05, 0.4, 0.8}) {
        const Vec2 fd = (sol.eval_J(x + 1e-6) - sol.eval_J(x - 1e-6)) * (1.0 / 2e-6);
        const Vec2 an = sol.eval_J_prime(x);
        CHECK(an.x0 == doctest::Approx(fd.x0).epsilon(1e-7));
        CHECK(an.x1 == doctest::Approx(fd.x1).epsilon(1e-7));
    }
}

TEST_CASE("spectrum and eigenvector conventions") {
    const RiccatiSolution sol = solve_riccati(ModelParams::make(0.0, 1.0));
    CHECK(sol.lambda0 == 0.0);
    CHECK(sol.lambda1 == doctest::Approx(-2.8785).epsilon(1e-4));
    const Vec2 r0 = sol.B * sol.V0 - sol.V0 * sol.lambda0;
    const Vec2 r1 = sol.B * sol.V1 - sol.V1 * sol.lambda1;
    CHECK(r0.max_abs() < 1e-10);
    CHECK(r1.max_abs() < 1e-10);
    CHECK(sol.V0.x0 > 0.0);
    CHECK(sol.V0.x1 > 0.0);
    CHECK(sol.V1.x0 > 0.0);
    CHECK(sol.V1.x1 < 0.0);

    // ordering across a small regime sweep
    for (double mu : {0.0, 1.0, -1.0})
        for (double sigma : {0.5, 1.0, 2.0}) {
            const ModelParams p = ModelParams::make(mu, sigma);
            const RiccatiSolution s = solve_riccati(p);
            CHECK(s.lambda1 < s.lambda0);
            CHECK(s.lambda0 <= 1e-15);
            CHECK((p.regime == Regime::Supercritical) == (s.lambda0 < -1e-12));
        }
}

TEST_CASE("boundary-derivative functional: fixed point and kernel relation") {
    for (auto [mu, sigma] : {std::pair{0.0, 1.0}, {0.0, 2.0}, {1.0, 2.0}, {1.0, 0.5}}) {
        const ModelParams p = ModelParams::make(mu, sigma);
        const RiccatiSolution sol = solve_riccati(p);
        const Mat22 BJ = b_of_j(p, sol.eval_J_prime(0.0), sol.eval_J_prime(1.0));
        CHECK((BJ - sol.B).max_abs() < 1e-8);

        const Vec2 kv = sol.B * Vec2{1.0 - sol.masses.x0, 1.0 - sol.masses.x1};
        CHECK(kv.max_abs() < 1e-8);
    }
    const ModelParams p = ModelParams::make(1.5, 0.8);
    const Mat22 Bz = b_of_j(p, {0.0, 0.0}, {0.0, 0.0});
    CHECK(Bz.a00 == doctest::Approx(-2.0 * 1.5 * 0.8));
    CHECK(Bz.a11 == doctest::Approx(2.0 * 1.5 * 0.8));
    CHECK(Bz.a01 == 0.0);
    CHECK(Bz.a10 == 0.0);
}

TEST_CASE("masses across the dichotomy") {
    const RiccatiSolution super = solve_riccati(ModelParams::make(1.0, 2.0));
    CHECK(super.masses.x0 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(super.masses.x1 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(super.mJ == doctest::Approx(1.0).epsilon(1e-8));

    const RiccatiSolution sub = solve_riccati(ModelParams::make(1.0, 0.5));
    CHECK(sub.masses.x0 < 1.0 - 1e-3);
    CHECK(sub.masses.x1 < 1.0 - 1e-3);

    // driftless subcritical has exactly sigma as both masses
    const RiccatiSolution half = solve_riccati(ModelParams::make(0.0, 0.5));
    CHECK(half.masses.x0 == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(half.masses.x1 == doctest::Approx(0.5).epsilon(1e-10));

    // critical balance identity at omega0 = |mu|
    const double coth1 = 1.0 / std::tanh(1.0);
    const RiccatiSolution crit = solve_riccati(ModelParams::make(1.0, coth1));
    const double lhs = crit.masses.x0 + std::exp(2.0) * crit.masses.x1;
    const double rhs = 2.0 * coth1 * std::exp(1.0) * std::sinh(1.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("drift reflection symmetry") {
    for (double sigma : {0.5, 1.3, 2.0}) {
        const RiccatiSolution pos = solve_riccati(ModelParams::make(1.0, sigma));
        const RiccatiSolution neg = solve_riccati(ModelParams::make(-1.0, sigma));
        CHECK(pos.omega0 == doctest::Approx(neg.omega0).epsilon(1e-12));
        CHECK(pos.omega1 == doctest::Approx(neg.omega1).epsilon(1e-12));
        for (double x : {0.0, 0.21, 0.5, 0.77, 1.0}) {
            CHECK(pos.eval_J(x).x0 == doctest::Approx(neg.eval_J(1.0 - x).x1).epsilon(1e-9));
            CHECK(pos.eval_J(x).x1 == doctest::Approx(neg.eval_J(1.0 - x).x0).epsilon(1e-9));
        }
    }
}

TEST_CASE("sinh-ratio difference stays nonnegative") {
    const RiccatiSolution sol = solve_riccati(ModelParams::make(0.5, 2.0));
    for (int i = 0; i <= 200; ++i) {
        const double y = i / 200.0;
        CHECK(ratio_sinh(y, sol.omega0) - ratio_sinh(y, sol.omega1) >= -1e-14);
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(ModelParams::make(1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams::make(1.0, 0.0), std::invalid_argument);
    CHECK(ModelParams::make(0.0, 1.0).regime == Regime::Critical);
    CHECK(ModelParams::make(0.0, 1.0 + 1e-10).regime == Regime::Supercritical);
    CHECK(ModelParams::make(0.0, 1.0, Regime::Subcritical).regime == Regime::Subcritical);
}
