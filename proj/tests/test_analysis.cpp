#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "dynbc/analysis.hpp"
#include "dynbc/quad.hpp"
#include "dynbc/semigroup.hpp"

using namespace dynbc;

namespace {

std::shared_ptr<const Kernel> kern() {
    static auto k = std::make_shared<Kernel>();
    return k;
}

BoundaryFunction make_member(const std::function<double(double)>& phi, const RiccatiSolution& sol,
                             int n = 128) {
    Vec2 pj{};
    const auto& g = quad::gauss_rule(10);
    const int panels = 64;
    for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double x = (p + 0.5) / panels + 0.5 / panels * g.nodes[i];
            pj += sol.eval_J(x) * (0.5 / panels * g.weights[i] * phi(x));
        }
    return BoundaryFunction::from_callable(phi, pj.x0, pj.x1, n);
}

} // namespace

TEST_CASE("defect and decomposition") {
    const RiccatiSolution sol = solve_riccati(ModelParams::make(1.0, 0.5));

    CHECK(defect(BoundaryFunction::zero(64), sol).max_abs() < 1e-14);
    const DefectDecomposition z = decompose({0.0, 0.0}, sol);
    CHECK(z.a0 == 0.0);
    CHECK(z.a1 == 0.0);

    // constructed member of the compatible subspace
    const BoundaryFunction member =
        make_member([](double x) { return 0.7 + 0.2 * std::cos(M_PI * x); }, sol);
    CHECK(defect(member, sol).max_abs() < 1e-9);

    // constant 1 with boundary 1 in the subcritical regime: defect along V0
    const BoundaryFunction one = BoundaryFunction::constant(1.0, 128);
    const Vec2 d = defect(one, sol);
    CHECK(d.x0 == doctest::Approx(1.0 - sol.masses.x0).epsilon(1e-7));
    CHECK(d.x1 == doctest::Approx(1.0 - sol.masses.x1).epsilon(1e-7));
    const DefectDecomposition dd = decompose(d, sol);
    CHECK(std::abs(dd.a1) < 1e-8);
    CHECK(dd.a0 > 0.0);

    // decomposition reconstructs d
    const DefectDecomposition r = decompose({0.37, -0.21}, sol);
    const Vec2 back = sol.V0 * r.a0 + sol.V1 * r.a1;
    CHECK(back.x0 == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(back.x1 == doctest::Approx(-0.21).epsilon(1e-12));
}

TEST_CASE("closed forms: eigen residual and boundary relations") {
    for (auto [mu, sigma] :
         {std::pair{0.0, 2.0}, {1.0, 2.0}, {0.0, 1.0}, {1.0, 1.0 / std::tanh(1.0)}, {1.0, 0.5}}) {
        const RiccatiSolution sol = solve_riccati(ModelParams::make(mu, sigma));
        const ClosedForms cf = closed_forms(sol);

        // h1 solves the interior equation at rate lambda1 (5-point oracle for h'')
        const double h = 1e-3;
        for (double x : {0.1, 0.5, 0.9}) {
            const double hpp = (-cf.h1(x + 2 * h) + 16 * cf.h1(x + h) - 30 * cf.h1(x) +
                                16 * cf.h1(x - h) - cf.h1(x - 2 * h)) /
                               (12 * h * h);
            const double res = 0.5 * hpp + mu * cf.h1_prime(x) + sol.lambda1 * cf.h1(x);
            CHECK(std::abs(res) < 1e-8 * (1.0 + std::abs(cf.h1(x))));
        }
        // boundary relations pin c1
        CHECK(std::abs(-sol.lambda1 * cf.h1(0.0) + sigma * cf.h1_prime(0.0)) <
              1e-8 * (1.0 + std::abs(cf.h1(0.0))));
        CHECK(std::abs(-sol.lambda1 * cf.h1(1.0) - sigma * cf.h1_prime(1.0)) <
              1e-8 * (1.0 + std::abs(cf.h1(1.0))));

        // K-normalizers exist with the right signs
        CHECK(cf.K0 > 0.0);
        CHECK(cf.K1 != 0.0);
        const Vec2 d0 = defect(BoundaryFunction::from_callable(cf.h0, cf.h0(0.0), cf.h0(1.0), 256),
                               sol);
        CHECK(std::abs(cf.K0 * d0.x0 - sol.V0.x0) < 1e-6);
        CHECK(std::abs(cf.K0 * d0.x1 - sol.V0.x1) < 1e-6);

        // g1 changes sign, g0 is positive (and constant off the supercritical regime)
        double g1min = 1e300, g1max = -1e300, g0min = 1e300;
        for (int i = 0; i <= 200; ++i) {
            const double x = i / 200.0;
            g1min = std::min(g1min, cf.g1(x));
            g1max = std::max(g1max, cf.g1(x));
            g0min = std::min(g0min, cf.g0(x));
        }
        CHECK(g1min < 0.0);
        CHECK(g1max > 0.0);
        CHECK(g0min > 0.0);
        if (sol.params.regime != Regime::Supercritical)
            CHECK(cf.g0(0.2) == doctest::Approx(cf.g0(0.8)).epsilon(1e-14));
    }

    // printed value of the driftless critical profile
    const ClosedForms crit = closed_forms(solve_riccati(ModelParams::make(0.0, 1.0)));
    CHECK(crit.h0(0.5) == doctest::Approx(0.75).epsilon(1e-14));

    // critical nonzero drift: u = t + h0 satisfies both endpoint conditions
    const double coth1 = 1.0 / std::tanh(1.0);
    const ClosedForms cm = closed_forms(solve_riccati(ModelParams::make(1.0, coth1)));
    CHECK(-coth1 * cm.h0_prime(0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(coth1 * cm.h0_prime(1.0) == doctest::Approx(1.0).epsilon(1e-10));

    // supercritical h0 propagates at rate lambda0
    const RiccatiSolution sup = solve_riccati(ModelParams::make(0.0, 2.0));
    const ClosedForms cs = closed_forms(sup);
    for (double x : {0.2, 0.6}) {
        const double h = 1e-3;
        const double hpp = (-cs.h0(x + 2 * h) + 16 * cs.h0(x + h) - 30 * cs.h0(x) +
                            16 * cs.h0(x - h) - cs.h0(x - 2 * h)) /
                           (12 * h * h);
        CHECK(std::abs(0.5 * hpp + sup.lambda0 * cs.h0(x)) < 1e-7 * (1.0 + std::abs(cs.h0(x))));
    }
}

TEST_CASE("nonnegativity classifier verdicts") {
    const RiccatiSolution sol = solve_riccati(ModelParams::make(0.0, 2.0));

    const BoundaryFunction member =
        make_member([](double x) { return 0.3 + 0.3 * x * (1.0 - x); }, sol);
    CHECK(classify_nonneg(member, sol).verdict == Verdict::Nonnegative);

    BoundaryFunction inflated = BoundaryFunction::from_callable(
        [](double x) { return 0.3 + 0.3 * x * (1.0 - x); }, member.f0() + 1.0, member.f1(), 128);
    const Classification ci = classify_nonneg(inflated, sol);
    CHECK(ci.verdict == Verdict::Indefinite);
    CHECK(std::abs(ci.a1) > 1e-3);

    CHECK(classify_nonneg(BoundaryFunction::constant(-1.0, 64), sol).verdict ==
          Verdict::Indefinite);
}

TEST_CASE("rate fitting") {
    // synthetic exponential field
    SpaceTimeField synth;
    synth.nodes = {0.0, 0.5, 1.0};
    for (int i = 0; i <= 40; ++i) {
        const double t = 0.05 * i;
        synth.times.push_back(t);
        synth.values.push_back({0.0, std::exp(0.7 * t), 0.5 * std::exp(0.7 * t)});
    }
    const RateFit fit = rate_fit(synth, 0.2, 1.8);
    CHECK(fit.slope == doctest::Approx(0.7).epsilon(1e-10));

    CHECK_THROWS_AS(rate_fit(synth, 5.0, 6.0, RateMode::log_sup), std::domain_error);

    // eigenmode growth through the solver
    const ModelParams p = ModelParams::make(0.0, 2.0);
    const RiccatiSolution sol = solve_riccati(p);
    const ClosedForms cf = closed_forms(sol);
    VolterraConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 1.5;
    cfg.n_space = 96;
    VolterraEngine eng(p, cfg, kern());

    const SpaceTimeField u1 =
        eng.solve(BoundaryFunction::from_callable(cf.h1, cf.h1(0.0), cf.h1(1.0), 96));
    const RateFit f1 = rate_fit(u1, 0.5, 1.5);
    CHECK(f1.slope == doctest::Approx(-sol.lambda1).epsilon(0.02));

    const SpaceTimeField u0 =
        eng.solve(BoundaryFunction::from_callable(cf.h0, cf.h0(0.0), cf.h0(1.0), 96));
    const RateFit f0 = rate_fit(u0, 0.5, 1.5);
    CHECK(f0.slope == doctest::Approx(-sol.lambda0).epsilon(0.02));

    // subcritical limit flattens
    const ModelParams ps = ModelParams::make(1.0, 0.5);
    VolterraConfig cfgs;
    cfgs.dt = 2e-3;
    cfgs.T = 4.0;
    cfgs.n_space = 96;
    VolterraEngine engs(ps, cfgs, kern());
    const SpaceTimeField us = engs.solve(BoundaryFunction::constant(1.0, 96));
    const RateFit fs = rate_fit(us, 2.0, 4.0);
    CHECK(std::abs(fs.slope) <= 0.02);
}

TEST_CASE("defect propagator") {
    const RiccatiSolution sol = solve_riccati(ModelParams::make(1.0, 2.0));
    for (double t : {0.0, 0.3, 1.0}) {
        const Mat22 E = exp_minus_tB(sol, t);
        const Vec2 e0 = E * sol.V0 - sol.V0 * std::exp(-t * sol.lambda0);
        const Vec2 e1 = E * sol.V1 - sol.V1 * std::exp(-t * sol.lambda1);
        CHECK(e0.max_abs() < 1e-12 * std::exp(-t * sol.lambda0));
        CHECK(e1.max_abs() < 1e-12 * std::exp(-t * sol.lambda1));
    }
}

TEST_CASE("limit shape of the normalized mode") {
    // e^{t lambda1} u_f -> a1 g1 when a1 != 0; the slower components die off
    // like e^{(lambda1-lambda0) t}, so the 1% shape tolerance needs the fast
    // mode to dominate the data at the separation-scaled horizon
    const ModelParams p = ModelParams::make(0.0, 1.0);
    const RiccatiSolution sol = solve_riccati(p);
    const ClosedForms cf = closed_forms(sol);
    VolterraConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 1.5;
    cfg.n_space = 96;
    VolterraEngine eng(p, cfg, kern());

    auto g1 = cf.g1;
    const BoundaryFunction f = BoundaryFunction::from_callable(
        [g1](double x) { return g1(x) + 0.05 * std::sin(2.0 * M_PI * x); }, g1(0.0) + 0.03,
        g1(1.0) - 0.02, 96);
    const DefectDecomposition dd = decompose(defect(f, sol), sol);
    REQUIRE(std::abs(dd.a1) > 1e-2);

    const SpaceTimeField u = eng.solve(f);
    const double t_hor = std::min(3.0 / std::abs(sol.lambda1 - sol.lambda0), cfg.T);
    const int i = u.row_at(t_hor);
    double g1sup = 0.0;
    for (double x : u.nodes) g1sup = std::max(g1sup, std::abs(cf.g1(x)));
    double worst = 0.0;
    for (int m = 0; m < u.cols(); ++m) {
        const double lhs = std::exp(u.times[i] * sol.lambda1) * u.values[i][m];
        worst = std::max(worst, std::abs(lhs - dd.a1 * cf.g1(u.nodes[m])));
    }
    CHECK(worst <= 0.01 * std::abs(dd.a1) * g1sup);
}
