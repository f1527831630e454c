// Command-line front end: construct the boundary system, solve the evolution
// problem, simulate the underlying paths, or run the verification battery.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynbc/analysis.hpp"
#include "dynbc/io.hpp"
#include "dynbc/kernel.hpp"
#include "dynbc/mc.hpp"
#include "dynbc/riccati.hpp"
#include "dynbc/semigroup.hpp"
#include "dynbc/special.hpp"
#include "dynbc/verify.hpp"

namespace {

using dynbc::io::RunSpec;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFailed = 3;

std::string out_path(const RunSpec& spec, const std::string& name) {
    std::filesystem::create_directories(spec.out_dir);
    return (std::filesystem::path(spec.out_dir) / name).string();
}

// Parse --f: named profile, "poly:c0,c1,...", or "csv:path" (x,value rows).
dynbc::BoundaryFunction resolve_f(const RunSpec& spec, const dynbc::RiccatiSolution& sol,
                                  int n_space) {
    using dynbc::BoundaryFunction;
    const std::string& s = spec.f_spec;
    auto with_boundary = [&](std::function<double(double)> fn, double d0, double d1) {
        const double f0 = spec.f_boundary_set ? spec.f0 : d0;
        const double f1 = spec.f_boundary_set ? spec.f1 : d1;
        return BoundaryFunction::from_callable(std::move(fn), f0, f1, n_space);
    };

    if (s == "zero") return with_boundary([](double) { return 0.0; }, 0.0, 0.0);
    if (s == "one") return with_boundary([](double) { return 1.0; }, 1.0, 1.0);
    if (s == "jcompat")
        return with_boundary([](double) { return 1.0; }, sol.masses.x0, sol.masses.x1);
    if (s == "sinpi")
        return with_boundary([](double x) { return std::sin(M_PI * x); }, 0.0, 0.0);
    if (s == "h0" || s == "h1") {
        const dynbc::ClosedForms cf = dynbc::closed_forms(sol);
        auto fn = (s == "h0") ? cf.h0 : cf.h1;
        return with_boundary(fn, fn(0.0), fn(1.0));
    }
    if (s.rfind("poly:", 0) == 0) {
        std::vector<double> coef;
        std::stringstream ss(s.substr(5));
        std::string tok;
        while (std::getline(ss, tok, ',')) coef.push_back(std::stod(tok));
        if (coef.empty()) throw CLI::ValidationError("--f poly: needs coefficients");
        auto fn = [coef](double x) {
            double v = 0.0;
            for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * x + *it;
            return v;
        };
        return with_boundary(fn, fn(0.0), fn(1.0));
    }
    if (s.rfind("csv:", 0) == 0) {
        std::ifstream in(s.substr(4));
        if (!in) throw CLI::ValidationError("--f csv: cannot open " + s.substr(4));
        std::vector<double> values;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || std::isalpha(line[0])) continue;
            const auto comma = line.find(',');
            values.push_back(std::stod(comma == std::string::npos ? line : line.substr(comma + 1)));
        }
        if (values.size() < 2) throw CLI::ValidationError("--f csv: too few rows");
        const double d0 = values.front(), d1 = values.back();
        auto bf = BoundaryFunction::from_grid(std::move(values),
                                              spec.f_boundary_set ? spec.f0 : d0,
                                              spec.f_boundary_set ? spec.f1 : d1);
        return bf;
    }
    throw CLI::ValidationError("--f: unknown profile '" + s + "'");
}

int cmd_riccati(const RunSpec& spec) {
    const auto p = dynbc::ModelParams::make(spec.mu, spec.sigma);
    const auto sol = dynbc::solve_riccati(p);
    dynbc::io::write_json(out_path(spec, "riccati.json"), spec, dynbc::io::riccati_to_json(sol));
    dynbc::io::write_profile_csv(out_path(spec, "J_profile.csv"), spec, sol);
    dynbc::io::write_closed_forms_csv(out_path(spec, "profiles.csv"), spec, sol);
    return kExitOk;
}

int cmd_solve(const RunSpec& spec, bool with_oracle) {
    const auto p = dynbc::ModelParams::make(spec.mu, spec.sigma);
    const auto sol = dynbc::solve_riccati(p);
    const dynbc::BoundaryFunction f = resolve_f(spec, sol, spec.n_space);

    dynbc::VolterraConfig cfg;
    cfg.dt = spec.dt;
    cfg.T = spec.T;
    cfg.n_space = spec.n_space;
    cfg.mode = spec.mode == "picard" ? dynbc::VolterraConfig::Mode::picard
                                     : dynbc::VolterraConfig::Mode::march;
    dynbc::VolterraEngine engine(p, cfg);
    const dynbc::SpaceTimeField field = engine.solve(f);

    dynbc::io::write_field_csv(out_path(spec, "field.csv"), spec, field);
    dynbc::io::write_traces_csv(out_path(spec, "traces.csv"), spec, field);

    json summary = dynbc::io::field_summary_json(field);
    const dynbc::DefectDecomposition dd = dynbc::decompose(dynbc::defect(f, sol), sol);
    summary["defect"] = {{"d", {dd.d.x0, dd.d.x1}}, {"a0", dd.a0}, {"a1", dd.a1}};
    const dynbc::Classification cls = dynbc::classify_nonneg(f, sol);
    summary["classifier"] = {{"verdict",
                              cls.verdict == dynbc::Verdict::Nonnegative ? "Nonnegative"
                                                                         : "Indefinite"},
                             {"a0", cls.a0},
                             {"a1", cls.a1},
                             {"min_f", cls.min_f}};
    if (field.times.back() > 0.5) {
        try {
            const dynbc::RateFit fit =
                dynbc::rate_fit(field, 0.25 * field.times.back(), field.times.back());
            summary["rate_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}};
        } catch (const std::domain_error&) {
            summary["rate_fit"] = nullptr;  // sup-norm hit zero inside the window
        }
    }
    if (with_oracle) {
        const dynbc::SpaceTimeField fd =
            dynbc::fd_solve(f, spec.mu, spec.sigma, spec.T, spec.n_space, spec.dt / 4.0);
        double sup = 0.0;
        for (int i = 0; i < field.rows(); ++i) {
            if (field.times[i] < 0.01) continue;
            const int j = fd.row_at(field.times[i]);
            if (std::abs(fd.times[j] - field.times[i]) > 1e-9) continue;
            const double scale = 1.0 + std::max(field.row_sup(i), fd.row_sup(j));
            sup = std::max(sup, field.row_dist(i, fd, j) / scale);
        }
        summary["fd_sup_diff"] = sup;
    }
    dynbc::io::write_json(out_path(spec, "summary.json"), spec, summary);
    return kExitOk;
}

int cmd_simulate(const RunSpec& spec) {
    const auto p = dynbc::ModelParams::make(spec.mu, spec.sigma);
    const auto sol = dynbc::solve_riccati(p);

    dynbc::SimConfig cfg;
    cfg.dt = spec.mc_dt;
    cfg.t_max = spec.mc_tmax;
    cfg.phi_floor = spec.phi_floor;
    cfg.n_paths = spec.n_paths;
    cfg.n_bins = spec.n_bins;
    cfg.seed = spec.seed;

    json result;
    bool inconclusive = false;
    for (int k = 0; k <= 1; ++k) {
        dynbc::SimConfig ek = cfg;
        ek.seed = cfg.seed + k;  // distinct streams per start
        dynbc::ExitStats st = dynbc::run_exit(k, p, ek);

        dynbc::SimConfig sk = cfg;
        sk.dt = std::min(1e-4, cfg.dt * 10.0);
        sk.t_max = std::min(cfg.t_max, 200.0);
        sk.n_paths = std::min<long>(cfg.n_paths, 48);
        sk.seed = cfg.seed + 10 + k;
        const dynbc::SlopeEstimate slope = dynbc::phi_slope(p, sk);
        st.phi_slope = slope.slope;
        st.phi_slope_se = slope.se;
        inconclusive |= st.inconclusive;

        json jk = dynbc::io::exit_stats_to_json(st, k);
        jk["model_mass"] = k == 0 ? sol.masses.x0 : sol.masses.x1;
        jk["phi_slope_model"] = 1.0 - dynbc::mu_coth_mu(spec.mu) / spec.sigma;
        result["start_" + std::to_string(k)] = jk;
        dynbc::io::write_hist_csv(out_path(spec, "exit_hist_" + std::to_string(k) + ".csv"), spec,
                                  st, sol, k);
    }
    result["inconclusive"] = inconclusive;
    dynbc::io::write_json(out_path(spec, "exit_stats.json"), spec, result);
    return inconclusive ? kExitNumerical : kExitOk;
}

int cmd_verify(const RunSpec& spec, bool quick) {
    dynbc::verify::Options opts;
    opts.quick = quick;
    opts.seed = spec.seed;
    const auto results = dynbc::verify::run_all(opts, &std::cout);

    json checks = json::array();
    bool all_pass = true;
    for (const auto& r : results) {
        checks.push_back({{"name", r.name},
                          {"pass", r.pass},
                          {"measured", r.measured},
                          {"tolerance", r.tolerance},
                          {"seconds", r.seconds},
                          {"detail", r.detail}});
        all_pass &= r.pass;
    }
    dynbc::io::write_json(out_path(spec, "report.json"), spec,
                          json{{"checks", checks}, {"all_pass", all_pass}, {"quick", quick}});
    return all_pass ? kExitOk : kExitVerifyFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"1d diffusion on [0,1] with dynamic boundary conditions: boundary system, "
                 "semigroup solver, path simulation, verification"};
    app.require_subcommand(1);

    RunSpec spec;
    bool with_oracle = false, quick = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--mu", spec.mu, "drift");
        sub->add_option("--sigma", spec.sigma, "boundary rate");
        sub->add_option("--out", spec.out_dir, "output directory");
        sub->add_option("--seed", spec.seed, "master seed");
    };

    CLI::App* riccati = app.add_subcommand("riccati", "solve the boundary system");
    add_common(riccati);

    CLI::App* solve = app.add_subcommand("solve", "propagate initial data");
    add_common(solve);
    solve->add_option("--f", spec.f_spec, "profile: zero|one|jcompat|sinpi|h0|h1|poly:c0,..|csv:path")
        ->default_val("one");
    auto* f0opt = solve->add_option("--f0", spec.f0, "boundary slot at 0");
    auto* f1opt = solve->add_option("--f1", spec.f1, "boundary slot at 1");
    solve->add_option("--T", spec.T, "horizon");
    solve->add_option("--dt", spec.dt, "time step");
    solve->add_option("--nspace", spec.n_space, "spatial panels");
    solve->add_option("--mode", spec.mode, "march|picard");
    solve->add_flag("--oracle", with_oracle, "also run the finite-difference oracle");

    CLI::App* simulate = app.add_subcommand("simulate", "path simulation of the exit law");
    add_common(simulate);
    simulate->add_option("--paths", spec.n_paths, "number of paths");
    simulate->add_option("--dt", spec.mc_dt, "Euler step");
    simulate->add_option("--tmax", spec.mc_tmax, "truncation horizon");
    simulate->add_option("--floor", spec.phi_floor, "clock-debt level declaring no return");
    simulate->add_option("--bins", spec.n_bins, "exit histogram bins");

    CLI::App* verify = app.add_subcommand("verify", "run the verification battery");
    add_common(verify);
    verify->add_flag("--quick", quick, "skip Monte Carlo heavy checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    spec.f_boundary_set = f0opt->count() > 0 || f1opt->count() > 0;
    if (spec.f_boundary_set) {
        if (f0opt->count() == 0) spec.f0 = 0.0;
        if (f1opt->count() == 0) spec.f1 = 0.0;
    }

    try {
        if (riccati->parsed()) {
            spec.command = "riccati";
            return cmd_riccati(spec);
        }
        if (solve->parsed()) {
            spec.command = "solve";
            return cmd_solve(spec, with_oracle);
        }
        if (simulate->parsed()) {
            spec.command = "simulate";
            return cmd_simulate(spec);
        }
        spec.command = "verify";
        return cmd_verify(spec, quick);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CLI::Error& e) {
        std::cerr << "validation error: " << e.get_name() << "\n";
        return kExitValidation;
    } catch (const dynbc::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        try {
            dynbc::io::write_json(out_path(spec, "error.json"), spec,
                                  json{{"error", "numerical"}, {"message", e.what()}});
        } catch (...) {
        }
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
