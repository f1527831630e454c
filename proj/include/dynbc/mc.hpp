#ifndef DYNBC_MC_HPP
#define DYNBC_MC_HPP

#include <cstdint>
#include <vector>

#include "dynbc/riccati.hpp"

namespace dynbc {

struct SimConfig {
    double dt = 1e-5;          // Euler step
    double t_max = 100.0;      // truncation horizon
    double phi_floor = -25.0;  // clock-debt level declaring the time change infinite
    long n_paths = 100000;
    std::uint64_t seed = 20240405;
    int n_bins = 20;
    int n_threads = 0;  // 0 = hardware concurrency (results independent of the value)

    void validate() const;
};

/// Single-path bookkeeping: position, the two accumulated boundary
/// regulators, the clock, and the time-change numerator phi.
struct PathState {
    double x = 0.0;
    double l0 = 0.0, l1 = 0.0;
    double phi = 0.0;
    double clock = 0.0;
};

struct FoldResult {
    double x;
    double push0;
    double push1;
};

/// Reflects a raw position into [0,1] segment by segment, accumulating the
/// total folded distance per boundary (the discrete regulator increments).
FoldResult fold(double x_raw);

/// One Euler step of the reflected diffusion; phi is recomputed from its
/// defining identity clock - (l0 + l1)/sigma.
void step(PathState& s, double mu, double sigma, double dt, double normal_draw);

struct ExitStats {
    double p_finite = 0.0;
    double p_finite_se = 0.0;
    std::vector<long> exit_hist;     // counts over n_bins even bins of (0,1)
    long n_exit = 0;
    long n_infinite = 0;
    long n_censored = 0;
    double phi_slope = 0.0;  // filled by phi_slope runs
    double phi_slope_se = 0.0;
    bool inconclusive = false;  // censoring rate >= 1%
};

/// Exit law from a boundary start: runs paths until the time change first
/// turns on (exit recorded), the clock debt passes phi_floor (infinite), or
/// the horizon truncates the path (censored).
ExitStats run_exit(int k, const ModelParams& p, const SimConfig& cfg);

struct SlopeEstimate {
    double slope = 0.0;
    double se = 0.0;
};

/// Long-run linear rate of phi, averaged over paths at the horizon.
SlopeEstimate phi_slope(const ModelParams& p, const SimConfig& cfg, double x0 = 0.5);

/// One draw of the time-changed process at time-change value T; NaN marks the
/// graveyard, censoring is reported through the flag.
struct YSample {
    double y = 0.0;
    bool alive = false;
    bool censored = false;
};
YSample sample_Y(double x0, double T, const ModelParams& p, const SimConfig& cfg,
                 std::uint64_t stream);

/// All paths' Y draws in one deterministic batch.
std::vector<YSample> sample_Y_batch(double x0, double T, const ModelParams& p,
                                    const SimConfig& cfg);

/// Time-average occupation histogram over [burn_in, t_max] of a single long
/// path (normalized to a density over the bins).
std::vector<double> occupation_check(const ModelParams& p, const SimConfig& cfg, double x0 = 0.5,
                                     double burn_in = 1.0);

} // namespace dynbc

#endif
