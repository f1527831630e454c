#include "dynbc/mc.hpp"

#include <cmath>
#include <limits>
#include <thread>

#include "dynbc/rng.hpp"

namespace dynbc {

void SimConfig::validate() const {
    if (!(dt > 0.0) || dt > 1e-3) throw std::invalid_argument("SimConfig: need 0 < dt <= 1e-3");
    if (!(t_max > 0.0)) throw std::invalid_argument("SimConfig: t_max must be positive");
    if (!(phi_floor <= -5.0)) throw std::invalid_argument("SimConfig: phi_floor must be <= -5");
    if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be positive");
    if (n_bins < 1) throw std::invalid_argument("SimConfig: n_bins must be positive");
}

FoldResult fold(double x_raw) {
    FoldResult r{x_raw, 0.0, 0.0};
    while (r.x < 0.0 || r.x > 1.0) {
        if (r.x > 1.0) {
            r.push1 += r.x - 1.0;
            r.x = 2.0 - r.x;
        } else {
            r.push0 += -r.x;
            r.x = -r.x;
        }
    }
    return r;
}

void step(PathState& s, double mu, double sigma, double dt, double normal_draw) {
    const FoldResult fr = fold(s.x + mu * dt + std::sqrt(dt) * normal_draw);
    // the regulator increment is twice the fold overshoot: one reflection at 0
    // maps raw -> -raw, and raw + dL = -raw needs dL = 2|raw|
    s.x = fr.x;
    s.l0 += 2.0 * fr.push0;
    s.l1 += 2.0 * fr.push1;
    s.clock += dt;
    s.phi = s.clock - (s.l0 + s.l1) / sigma;
}

namespace {

int thread_count(const SimConfig& cfg) {
    if (cfg.n_threads > 0) return cfg.n_threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(path_index, rng) for every path, split across threads. Each path
// owns its RNG stream and its own result slot, so the merged outcome is
// byte-identical for any thread count.
template <typename Body>
void for_each_path(const SimConfig& cfg, Body&& body) {
    const int nt = thread_count(cfg);
    const long n = cfg.n_paths;
    if (nt <= 1) {
        for (long i = 0; i < n; ++i) {
            Xoshiro256pp rng(cfg.seed, static_cast<std::uint64_t>(i));
            body(i, rng);
        }
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (long i = t; i < n; i += nt) {
                Xoshiro256pp rng(cfg.seed, static_cast<std::uint64_t>(i));
                body(i, rng);
            }
        });
    }
    for (auto& th : pool) th.join();
}

enum class Outcome : std::uint8_t { exit, infinite, censored };

// Exact reflected pair for a step that starts exactly on a boundary: the
// running maximum of the opposing free motion given its endpoint is
// bridge-distributed, so the regulator increment can be drawn exactly. The
// plain fold sees no local time on the ~1/2 of first draws that point inward,
// which would turn the knife-edge start phi = 0 into an immediate spurious
// exit.
struct BoundaryStep {
    double x;  // distance from the starting wall, >= 0
    double l;  // regulator increment (Skorohod scale, no doubling)
};

inline BoundaryStep boundary_start_step(double drift_away, double dt, double sqdt,
                                        Xoshiro256pp& rng) {
    const double b = drift_away * dt + sqdt * rng.normal();
    const double u = rng.uniform_pos();
    const double m = 0.5 * (-b + std::sqrt(b * b - 2.0 * dt * std::log(u)));
    return {b + m, m};
}

} // namespace

ExitStats run_exit(int k, const ModelParams& p, const SimConfig& cfg) {
    cfg.validate();
    if (k != 0 && k != 1) throw std::invalid_argument("run_exit: start must be a boundary point");

    const double mu = p.mu, sigma = p.sigma;
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const long max_steps = static_cast<long>(cfg.t_max / dt) + 1;
    const double invsig = 1.0 / sigma;

    std::vector<Outcome> outcome(cfg.n_paths);
    std::vector<float> exit_pos(cfg.n_paths, 0.0f);

    for_each_path(cfg, [&](long i, Xoshiro256pp& rng) {
        const BoundaryStep first =
            boundary_start_step(k == 0 ? mu : -mu, dt, sqdt, rng);
        double x = k == 0 ? first.x : 1.0 - first.x;
        double l = first.l;
        double clock = dt;
        Outcome oc = Outcome::censored;
        for (long n = 1; n < max_steps; ++n) {
            const double phi = clock - l * invsig;
            if (phi > 0.0) {
                oc = Outcome::exit;
                break;
            }
            if (phi < cfg.phi_floor) {
                oc = Outcome::infinite;
                break;
            }
            double xr = x + mu * dt + sqdt * rng.normal();
            // inline fold: one reflection nearly always suffices at these dt
            while (xr < 0.0 || xr > 1.0) {
                if (xr > 1.0) {
                    l += 2.0 * (xr - 1.0);
                    xr = 2.0 - xr;
                } else {
                    l += 2.0 * -xr;
                    xr = -xr;
                }
            }
            x = xr;
            clock += dt;
        }
        outcome[i] = oc;
        exit_pos[i] = static_cast<float>(x);
    });

    ExitStats st;
    st.exit_hist.assign(cfg.n_bins, 0);
    for (long i = 0; i < cfg.n_paths; ++i) {
        switch (outcome[i]) {
            case Outcome::exit: {
                ++st.n_exit;
                int b = static_cast<int>(exit_pos[i] * cfg.n_bins);
                if (b < 0) b = 0;
                if (b >= cfg.n_bins) b = cfg.n_bins - 1;
                ++st.exit_hist[b];
                break;
            }
            case Outcome::infinite: ++st.n_infinite; break;
            case Outcome::censored: ++st.n_censored; break;
        }
    }
    const double n = static_cast<double>(cfg.n_paths);
    st.p_finite = st.n_exit / n;
    st.p_finite_se = std::sqrt(std::max(0.0, st.p_finite * (1.0 - st.p_finite) / n));
    st.inconclusive = st.n_censored >= 0.01 * n;
    return st;
}

SlopeEstimate phi_slope(const ModelParams& p, const SimConfig& cfg, double x0) {
    cfg.validate();
    const double mu = p.mu, sigma = p.sigma;
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const long steps = static_cast<long>(std::llround(cfg.t_max / dt));
    const double invsig = 1.0 / sigma;

    std::vector<double> ratio(cfg.n_paths);
    for_each_path(cfg, [&](long i, Xoshiro256pp& rng) {
        double x = x0;
        double l = 0.0;
        for (long n = 0; n < steps; ++n) {
            double xr = x + mu * dt + sqdt * rng.normal();
            while (xr < 0.0 || xr > 1.0) {
                if (xr > 1.0) {
                    l += 2.0 * (xr - 1.0);
                    xr = 2.0 - xr;
                } else {
                    l += 2.0 * -xr;
                    xr = -xr;
                }
            }
            x = xr;
        }
        const double T = steps * dt;
        ratio[i] = (T - l * invsig) / T;
    });

    SlopeEstimate est;
    double mean = 0.0;
    for (double r : ratio) mean += r;
    mean /= cfg.n_paths;
    double var = 0.0;
    for (double r : ratio) var += (r - mean) * (r - mean);
    var = cfg.n_paths > 1 ? var / (cfg.n_paths - 1) : 0.0;
    est.slope = mean;
    est.se = std::sqrt(var / cfg.n_paths);
    return est;
}

YSample sample_Y(double x0, double T, const ModelParams& p, const SimConfig& cfg,
                 std::uint64_t stream) {
    const double mu = p.mu, sigma = p.sigma;
    const double dt = cfg.dt;
    const long max_steps = static_cast<long>(cfg.t_max / dt) + 1;

    Xoshiro256pp rng(cfg.seed, stream);
    PathState s;
    s.x = x0;
    YSample out;
    for (long n = 0; n < max_steps; ++n) {
        step(s, mu, sigma, dt, rng.normal());
        if (s.phi > T) {
            out.y = s.x;
            out.alive = true;
            return out;
        }
        if (s.phi - T < cfg.phi_floor) {
            out.y = std::numeric_limits<double>::quiet_NaN();
            out.alive = false;
            return out;
        }
    }
    out.censored = true;
    out.y = std::numeric_limits<double>::quiet_NaN();
    return out;
}

std::vector<YSample> sample_Y_batch(double x0, double T, const ModelParams& p,
                                    const SimConfig& cfg) {
    cfg.validate();
    const double mu = p.mu, sigma = p.sigma;
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const long max_steps = static_cast<long>(cfg.t_max / dt) + 1;
    const double invsig = 1.0 / sigma;

    std::vector<YSample> out(cfg.n_paths);
    for_each_path(cfg, [&](long i, Xoshiro256pp& rng) {
        double x = x0;
        double l = 0.0;
        double clock = 0.0;
        YSample ys;
        ys.censored = true;
        ys.y = std::numeric_limits<double>::quiet_NaN();
        for (long n = 0; n < max_steps; ++n) {
            double xr = x + mu * dt + sqdt * rng.normal();
            while (xr < 0.0 || xr > 1.0) {
                if (xr > 1.0) {
                    l += 2.0 * (xr - 1.0);
                    xr = 2.0 - xr;
                } else {
                    l += 2.0 * -xr;
                    xr = -xr;
                }
            }
            x = xr;
            clock += dt;
            const double phi = clock - l * invsig;
            if (phi > T) {
                ys = YSample{x, true, false};
                break;
            }
            if (phi - T < cfg.phi_floor) {
                ys = YSample{std::numeric_limits<double>::quiet_NaN(), false, false};
                break;
            }
        }
        out[i] = ys;
    });
    return out;
}

std::vector<double> occupation_check(const ModelParams& p, const SimConfig& cfg, double x0,
                                     double burn_in) {
    cfg.validate();
    const double mu = p.mu;
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const long steps = static_cast<long>(std::llround(cfg.t_max / dt));
    const long burn = static_cast<long>(burn_in / dt);

    Xoshiro256pp rng(cfg.seed, 0);
    double x = x0;
    std::vector<long> hist(cfg.n_bins, 0);
    long counted = 0;
    for (long n = 0; n < steps; ++n) {
        double xr = x + mu * dt + sqdt * rng.normal();
        while (xr < 0.0 || xr > 1.0) xr = (xr > 1.0) ? 2.0 - xr : -xr;
        x = xr;
        if (n >= burn) {
            int b = static_cast<int>(x * cfg.n_bins);
            if (b >= cfg.n_bins) b = cfg.n_bins - 1;
            ++hist[b];
            ++counted;
        }
    }
    std::vector<double> density(cfg.n_bins);
    for (int b = 0; b < cfg.n_bins; ++b)
        density[b] = static_cast<double>(hist[b]) / counted * cfg.n_bins;
    return density;
}

} // namespace dynbc
