#ifndef DYNBC_SEMIGROUP_HPP
#define DYNBC_SEMIGROUP_HPP

#include <memory>
#include <vector>

#include "dynbc/boundary_function.hpp"
#include "dynbc/kernel.hpp"
#include "dynbc/mat2.hpp"
#include "dynbc/riccati.hpp"

namespace dynbc {

struct VolterraConfig {
    double dt = 1e-3;
    double T = 1.0;
    int n_space = 200;
    enum class Mode { march, picard } mode = Mode::march;
    int picard_iters = 16;
    double quad_tol = 1e-8;
    int out_stride = 0;  // 0 = choose automatically (~200 output rows)

    void validate() const;
};

/// Numerical solution on a time x space grid. Row 0 is the initial data; the
/// first/last columns are the boundary traces.
struct SpaceTimeField {
    std::vector<double> times;
    std::vector<double> nodes;                // closed grid including endpoints
    std::vector<std::vector<double>> values;  // [time][node]

    int rows() const { return static_cast<int>(times.size()); }
    int cols() const { return static_cast<int>(nodes.size()); }

    Vec2 trace(int i) const { return {values[i].front(), values[i].back()}; }
    double row_sup(int i) const;
    /// Largest value of |row_i - row_j| over all nodes.
    double row_dist(int i, const SpaceTimeField& other, int j) const;
    /// Row index with time closest to t.
    int row_at(double t) const;
    /// Reinterpret row i as initial data (interior columns + boundary slots).
    BoundaryFunction row_as_function(int i) const;
};

/// Boundary-pairing weights: w_0 decays from 1 to 0, w_1 grows from 0 to 1,
/// both harmonic for the adjoint drift; straight lines in the driftless limit.
double hat_weight(int k, double mu, double x);

/// The 2x2 boundary coupling matrix; rank one with eigenvalues {0, trace}.
Mat22 boundary_matrix_A(const ModelParams& p);

struct PicardResult {
    std::vector<Vec2> v;             // final iterate on the time grid
    std::vector<double> increments;  // sup-norm of v^n - v^{n-1}
    std::vector<double> envelope;    // a-priori bound for each increment
    double L = 0.0;                  // measured sup of sqrt(t)*||Khat(t)||
    double v0_norm = 0.0;
    bool converged = false;
    bool certified = false;  // envelope at the configured iteration count <= quad_tol
};

/// Semigroup solver: propagates initial data through the boundary-hat
/// Volterra system and reconstructs the full space-time field.
///
/// Construction precomputes everything f-independent (singular-kernel panel
/// moments, hat tables); individual solves are then cheap, so one engine
/// should be reused across many initial data at fixed (params, grids).
class VolterraEngine {
public:
    VolterraEngine(const ModelParams& p, const VolterraConfig& cfg,
                   std::shared_ptr<const Kernel> kernel = nullptr);

    const ModelParams& params() const { return p_; }
    const VolterraConfig& config() const { return cfg_; }
    const Kernel& kernel() const { return *kern_; }
    int steps() const { return M_; }

    /// Hat transform (f_hat_0, f_hat_1), interior values only.
    Vec2 hat_transform(const BoundaryFunction& f) const;

    /// Forcing term of the hat Volterra equation at arbitrary t > 0.
    Vec2 assemble_rhat(const BoundaryFunction& f, double t) const;
    /// Weakly singular 2x2 convolution kernel at arbitrary t > 0.
    Mat22 assemble_Khat(double t) const;

    /// sup over a log-spaced scan of sqrt(t) * ||Khat(t)||_op on (0, tmax].
    double measured_L(double tmax, int points = 200) const;

    /// Product-integration march of the hat system on the uniform grid.
    std::vector<Vec2> volterra_march(const BoundaryFunction& f) const;

    /// Fixed-point iteration from v0 = rhat, with the a-priori envelope
    /// attached. Throws numerical_error if an increment pierces the envelope.
    PicardResult picard_solve(const BoundaryFunction& f) const;

    /// Full field from a solved hat trajectory: interior by product
    /// integration against the boundary traces, traces themselves from the
    /// exact boundary recurrence (never the interior formula at endpoints).
    SpaceTimeField reconstruct_field(const BoundaryFunction& f, const std::vector<Vec2>& v) const;

    /// march (or picard, per config) + reconstruct.
    SpaceTimeField solve(const BoundaryFunction& f) const;

    /// Boundary traces on the full grid for a solved trajectory.
    std::vector<Vec2> boundary_traces(const BoundaryFunction& f, const std::vector<Vec2>& v) const;

    /// Interior heat-semigroup term: absorbed-kernel integral of f at (t, x).
    double absorbed_term(const BoundaryFunction& f, double t, double x) const;

private:
    struct FData;  // per-f sampled values and spectral moments

    FData sample(const BoundaryFunction& f) const;
    std::vector<Vec2> rhat_grid(const FData& fd) const;
    Mat22 rq_interp(double s) const;      // s * qhat(s^2) from the table
    Mat22 qhat(double t) const;           // table-interpolated q-hat matrix
    Mat22 qhat_direct(double t) const;    // quadrature evaluation (table build)
    Vec2 qhat_dot_row(double t, double y) const;  // d/dt of the hat of the absorbed kernel
    double hf_row(const FData& fd, double t, double x) const;

    void build_rq_table();
    void build_moments();
    void build_hat_table();
    void build_recon_moments();

    ModelParams p_;
    VolterraConfig cfg_;
    std::shared_ptr<const Kernel> kern_;
    int M_ = 0;
    int stride_ = 1;
    int n_spec_ = 12;  // sine modes carried by the spectral branch
    Mat22 A_;
    double theta_ = 0.0;

    std::vector<double> yq_, ywt_, w0q_, w1q_;  // spatial pairing rule
    std::vector<double> xs_;                    // output nodes (closed grid)

    double ds_ = 0.0;
    std::vector<Mat22> rq_;  // s * qhat(s^2) on the uniform s-grid

    std::vector<Mat22> Am_, Bm_;            // Khat panel moments per lag
    std::vector<Mat22> D_;                  // forcing propagator per grid time
    std::vector<std::vector<Vec2>> Hw_;     // hat of absorbed kernel, weight-folded
    std::vector<std::vector<Vec2>> qAm_, qBm_;  // reconstruction moments [x][lag]
};

/// Independent finite-difference oracle for the same initial-boundary value
/// problem (implicit trapezoid in time, centered interior differences,
/// second-order one-sided boundary derivatives). Covers any sigma, including
/// the Markov cases sigma <= 0.
SpaceTimeField fd_solve(const BoundaryFunction& f, double mu, double sigma, double T, int n_space,
                        double dt, int out_stride = 0);

} // namespace dynbc

#endif
