#ifndef DYNBC_RICCATI_HPP
#define DYNBC_RICCATI_HPP

#include <optional>
#include <string>

#include "dynbc/mat2.hpp"

namespace dynbc {

enum class Regime { Supercritical, Critical, Subcritical };

std::string regime_name(Regime r);

/// Drift/boundary-rate pair with its criticality classification: the sign of
/// sigma - mu*coth(mu) decides whether boundary mass is conserved.
struct ModelParams {
    double mu = 0.0;
    double sigma = 1.0;
    Regime regime = Regime::Critical;

    static constexpr double kRegimeTol = 1e-12;

    /// Classifies sigma against mu*coth(mu); an explicit regime override is
    /// available for boundary studies at the critical threshold.
    static ModelParams make(double mu, double sigma, std::optional<Regime> force = std::nullopt);
};

/// Residuals of the two characteristic equations, scaled through by 2*sigma.
/// Evaluated in a factored form that is exact at omega = |mu| and free of the
/// small-omega cancellation of the printed formulas.
double char_g1(double omega, const ModelParams& p);
double char_g0(double omega, const ModelParams& p);

/// Complete boundary-system solution: roots, left eigenrows, coefficient
/// matrix with its spectrum, and the boundary masses.
struct RiccatiSolution {
    ModelParams params;
    double omega0 = 0.0;
    double omega1 = 0.0;
    Mat22 W;             // rows are the left eigenrows (1, r_k)
    Mat22 B;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    Vec2 V0, V1;         // right eigenvectors, normalized per the sign conventions
    Vec2 masses;         // (<1,J_0>, <1,J_1>)
    double mJ = 0.0;     // max of the masses (J >= 0)

    /// Both components of the vector density J at x in [0,1].
    Vec2 eval_J(double x) const;
    /// Analytic x-derivative of eval_J.
    Vec2 eval_J_prime(double x) const;
};

/// Roots (omega0, omega1) of the characteristic pair for the given params.
/// omega1 by bracket-doubling + bisection; omega0 = |mu| outside the
/// supercritical regime, else the interior root of char_g0.
struct OmegaPair {
    double omega0;
    double omega1;
};
OmegaPair solve_omegas(const ModelParams& p);

/// Left eigenrows W_k = (1, r_k) with r_0 from the plus branch at omega0 and
/// r_1 from the minus branch at omega1.
Mat22 left_eigenrows(const ModelParams& p, double omega0, double omega1);

/// The boundary-derivative functional applied to given endpoint derivatives.
Mat22 b_of_j(const ModelParams& p, const Vec2& jprime0, const Vec2& jprime1);

/// Full solve: roots, eigenrows, B = W^-1 diag(lambda) W, spectrum, masses.
RiccatiSolution solve_riccati(const ModelParams& p);

/// Quadrature of both components of J over (0,1).
Vec2 masses_of(const RiccatiSolution& sol);

} // namespace dynbc

#endif
