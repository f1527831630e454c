#ifndef DYNBC_ANALYSIS_HPP
#define DYNBC_ANALYSIS_HPP

#include <functional>

#include "dynbc/boundary_function.hpp"
#include "dynbc/riccati.hpp"
#include "dynbc/semigroup.hpp"

namespace dynbc {

/// Boundary-compatibility defect (f(0) - <f, J_0>, f(1) - <f, J_1>).
Vec2 defect(const BoundaryFunction& f, const RiccatiSolution& sol);

/// Same pairing applied to a solved field row (piecewise-linear values).
Vec2 defect_of_row(const SpaceTimeField& field, int row, const RiccatiSolution& sol);

struct DefectDecomposition {
    Vec2 d;
    double a0 = 0.0;
    double a1 = 0.0;
};

/// Coordinates of d in the eigenvector basis (V0 | V1); unique 2x2 solve.
DefectDecomposition decompose(const Vec2& d, const RiccatiSolution& sol);

/// Exact eigen-solutions and the limit profiles of the growth theory.
struct ClosedForms {
    double c0 = 0.0, c1 = 0.0;
    double K0 = 0.0, K1 = 0.0;
    std::function<double(double)> h0, h1;
    std::function<double(double)> h0_prime, h1_prime;
    std::function<double(double)> g0, g1;
};

ClosedForms closed_forms(const RiccatiSolution& sol);

enum class Verdict { Nonnegative, Indefinite };

struct Classification {
    Verdict verdict = Verdict::Indefinite;
    double a0 = 0.0, a1 = 0.0;
    double min_f = 0.0;
};

/// Sign-preservation test: nonnegative data whose defect is a nonnegative
/// multiple of the lead eigenvector, everything else indefinite.
Classification classify_nonneg(const BoundaryFunction& f, const RiccatiSolution& sol,
                               double tol = 1e-8);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

enum class RateMode { log_sup, linear_over_t };

/// Least-squares growth rate of the field sup-norm over a time window; the
/// linear_over_t mode fits ||u||/t for the critical linear-growth branch.
RateFit rate_fit(const SpaceTimeField& field, double t1, double t2,
                 RateMode mode = RateMode::log_sup);

/// e^{-tB} by the closed 2x2 eigendecomposition of the solution's B.
Mat22 exp_minus_tB(const RiccatiSolution& sol, double t);

} // namespace dynbc

#endif
