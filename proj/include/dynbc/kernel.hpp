#ifndef DYNBC_KERNEL_HPP
#define DYNBC_KERNEL_HPP

#include <stdexcept>

namespace dynbc {

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Truncation/representation parameters for the periodized heat kernel.
struct KernelConfig {
    int spatial_terms = 8;     // image-sum half width K
    int spectral_terms = 64;   // cosine-series length N
    double t_switch = 0.25;    // image sum for t <= t_switch, cosine series beyond
    double tol = 1e-12;        // target absolute truncation error

    void validate() const;
};

enum class Deriv { value, d_dx, d_dt };

/// Heat-kernel layer on [0,1]: periodized Gaussian G, the absorbed
/// fundamental solution, and the boundary hitting densities.
/// All evaluations are pure; a const Kernel is safe to share across threads.
class Kernel {
public:
    explicit Kernel(KernelConfig cfg = {});

    const KernelConfig& config() const { return cfg_; }

    /// Centered Gaussian density with variance t.
    double gauss(double t, double x) const;

    /// Period-2 even periodization of gauss, or its x/t derivative.
    double periodized_G(double t, double x, Deriv order = Deriv::value) const;

    /// Density in t of hitting boundary 0 before 1, started at x.
    double q0(double t, double x, double mu) const;
    /// Density in t of hitting boundary 1 before 0, started at x.
    double q1(double t, double x, double mu) const;

    /// Fundamental solution absorbed at both endpoints.
    double absorbed(double t, double x, double y, double mu) const;

    /// |mass conservation residual| at (t, x): interior mass plus both
    /// hitting-time integrals must give exactly 1.
    double mass_identity_residual(double t, double x, double mu) const;

private:
    void require_t(double t) const;

    KernelConfig cfg_;
};

} // namespace dynbc

#endif
