#ifndef DYNBC_IO_HPP
#define DYNBC_IO_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dynbc/mc.hpp"
#include "dynbc/riccati.hpp"
#include "dynbc/semigroup.hpp"

namespace dynbc::io {

using nlohmann::json;

/// FNV-1a 64-bit of the payload text; embedded in every output for
/// reproducibility checks.
std::uint64_t content_hash(const std::string& payload);
std::string hash_hex(std::uint64_t h);

/// Full description of a CLI invocation, embedded verbatim in every output.
struct RunSpec {
    std::string command;
    double mu = 0.0;
    double sigma = 1.0;
    std::string f_spec;
    double f0 = 0.0, f1 = 0.0;
    bool f_boundary_set = false;
    double T = 1.0;
    double dt = 1e-3;
    int n_space = 200;
    std::string mode = "march";
    double mc_dt = 1e-5;
    double mc_tmax = 100.0;
    double phi_floor = -25.0;
    long n_paths = 100000;
    int n_bins = 20;
    std::uint64_t seed = 20240405;
    std::string out_dir = ".";

    json to_json() const;
};

json riccati_to_json(const RiccatiSolution& sol);
json exit_stats_to_json(const ExitStats& st, int k);
json field_summary_json(const SpaceTimeField& field);

/// JSON file with the payload under "result", plus "runspec" and
/// "content_hash" of the canonical payload dump.
void write_json(const std::string& path, const RunSpec& spec, const json& result);

/// CSV writers; each emits two leading comment lines with the runspec and a
/// content hash of the data section. '.' decimal, ',' separator, header row.
void write_field_csv(const std::string& path, const RunSpec& spec, const SpaceTimeField& field);
void write_traces_csv(const std::string& path, const RunSpec& spec, const SpaceTimeField& field);
void write_profile_csv(const std::string& path, const RunSpec& spec, const RiccatiSolution& sol,
                       int points = 1001);
void write_closed_forms_csv(const std::string& path, const RunSpec& spec,
                            const RiccatiSolution& sol, int points = 1001);
void write_hist_csv(const std::string& path, const RunSpec& spec, const ExitStats& st,
                    const RiccatiSolution& sol, int k);

} // namespace dynbc::io

#endif
