#ifndef DYNBC_VERIFY_HPP
#define DYNBC_VERIFY_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dynbc::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;   // worst observed value for the headline comparison
    double tolerance = 0.0;
    double seconds = 0.0;
    std::string detail;
};

struct Options {
    bool quick = false;  // skip the Monte Carlo heavy checks, shrink batteries
    std::uint64_t seed = 20240405;
};

/// Runs the full verification battery; one result per criterion, a pass/fail
/// line per criterion on `progress` when given.
std::vector<CheckResult> run_all(const Options& opts, std::ostream* progress = nullptr);

} // namespace dynbc::verify

#endif
