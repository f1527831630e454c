#include "dynbc/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dynbc/analysis.hpp"

namespace dynbc::io {

std::uint64_t content_hash(const std::string& payload) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json RunSpec::to_json() const {
    json j{{"command", command}, {"mu", mu},       {"sigma", sigma},   {"seed", seed},
           {"out_dir", out_dir}, {"f_spec", f_spec}};
    if (command == "solve") {
        j["T"] = T;
        j["dt"] = dt;
        j["n_space"] = n_space;
        j["mode"] = mode;
        if (f_boundary_set) {
            j["f0"] = f0;
            j["f1"] = f1;
        }
    }
    if (command == "simulate") {
        j["mc_dt"] = mc_dt;
        j["mc_tmax"] = mc_tmax;
        j["phi_floor"] = phi_floor;
        j["n_paths"] = n_paths;
        j["n_bins"] = n_bins;
    }
    return j;
}

json riccati_to_json(const RiccatiSolution& sol) {
    return json{{"mu", sol.params.mu},
                {"sigma", sol.params.sigma},
                {"regime", regime_name(sol.params.regime)},
                {"omega0", sol.omega0},
                {"omega1", sol.omega1},
                {"W", {{sol.W.a00, sol.W.a01}, {sol.W.a10, sol.W.a11}}},
                {"B", {{sol.B.a00, sol.B.a01}, {sol.B.a10, sol.B.a11}}},
                {"lambda0", sol.lambda0},
                {"lambda1", sol.lambda1},
                {"V0", {sol.V0.x0, sol.V0.x1}},
                {"V1", {sol.V1.x0, sol.V1.x1}},
                {"masses", {sol.masses.x0, sol.masses.x1}}};
}

json exit_stats_to_json(const ExitStats& st, int k) {
    return json{{"start", k},
                {"p_finite", st.p_finite},
                {"p_finite_se", st.p_finite_se},
                {"n_exit", st.n_exit},
                {"n_infinite", st.n_infinite},
                {"n_censored", st.n_censored},
                {"phi_slope", st.phi_slope},
                {"phi_slope_se", st.phi_slope_se},
                {"inconclusive", st.inconclusive},
                {"exit_hist", st.exit_hist}};
}

json field_summary_json(const SpaceTimeField& field) {
    json sup = json::array(), t = json::array(), b0 = json::array(), b1 = json::array();
    for (int i = 0; i < field.rows(); ++i) {
        t.push_back(field.times[i]);
        sup.push_back(field.row_sup(i));
        b0.push_back(field.values[i].front());
        b1.push_back(field.values[i].back());
    }
    return json{{"times", t}, {"sup_norms", sup}, {"trace0", b0}, {"trace1", b1}};
}

void write_json(const std::string& path, const RunSpec& spec, const json& result) {
    json doc;
    doc["runspec"] = spec.to_json();
    doc["result"] = result;
    doc["content_hash"] = hash_hex(content_hash(result.dump()));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
}

namespace {

void write_csv(const std::string& path, const RunSpec& spec, const std::string& header,
               const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# runspec: " << spec.to_json().dump() << "\n";
    out << "# content_hash: " << hash_hex(content_hash(body)) << "\n";
    out << header << "\n" << body;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

void write_field_csv(const std::string& path, const RunSpec& spec, const SpaceTimeField& field) {
    std::ostringstream header, body;
    header << "t";
    for (double x : field.nodes) header << "," << fmt(x);
    for (int i = 0; i < field.rows(); ++i) {
        body << fmt(field.times[i]);
        for (double v : field.values[i]) body << "," << fmt(v);
        body << "\n";
    }
    write_csv(path, spec, header.str(), body.str());
}

void write_traces_csv(const std::string& path, const RunSpec& spec, const SpaceTimeField& field) {
    std::ostringstream body;
    for (int i = 0; i < field.rows(); ++i)
        body << fmt(field.times[i]) << "," << fmt(field.values[i].front()) << ","
             << fmt(field.values[i].back()) << "\n";
    write_csv(path, spec, "t,u0,u1", body.str());
}

void write_profile_csv(const std::string& path, const RunSpec& spec, const RiccatiSolution& sol,
                       int points) {
    std::ostringstream body;
    for (int i = 0; i < points; ++i) {
        const double x = static_cast<double>(i) / (points - 1);
        const Vec2 J = sol.eval_J(x);
        body << fmt(x) << "," << fmt(J.x0) << "," << fmt(J.x1) << "\n";
    }
    write_csv(path, spec, "x,J0,J1", body.str());
}

void write_closed_forms_csv(const std::string& path, const RunSpec& spec,
                            const RiccatiSolution& sol, int points) {
    const ClosedForms cf = closed_forms(sol);
    std::ostringstream body;
    for (int i = 0; i < points; ++i) {
        const double x = static_cast<double>(i) / (points - 1);
        body << fmt(x) << "," << fmt(cf.h0(x)) << "," << fmt(cf.h1(x)) << "," << fmt(cf.g0(x))
             << "," << fmt(cf.g1(x)) << "\n";
    }
    write_csv(path, spec, "x,h0,h1,g0,g1", body.str());
}

void write_hist_csv(const std::string& path, const RunSpec& spec, const ExitStats& st,
                    const RiccatiSolution& sol, int k) {
    const int nb = static_cast<int>(st.exit_hist.size());
    std::ostringstream body;
    for (int b = 0; b < nb; ++b) {
        const double lo = static_cast<double>(b) / nb;
        const double hi = static_cast<double>(b + 1) / nb;
        // model density of the exit position over this bin
        const double mass = k == 0 ? sol.masses.x0 : sol.masses.x1;
        const int samples = 8;
        double dens = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double x = lo + (hi - lo) * (i + 0.5) / samples;
            const Vec2 J = sol.eval_J(x);
            dens += (k == 0 ? J.x0 : J.x1) / mass / samples;
        }
        body << fmt(lo) << "," << fmt(hi) << "," << st.exit_hist[b] << "," << fmt(dens) << "\n";
    }
    write_csv(path, spec, "bin_left,bin_right,count,model_density", body.str());
}

} // namespace dynbc::io
