// Verification battery entry point: one pass/fail line per criterion, nonzero
// exit if anything fails.

#include <cstring>
#include <iostream>

#include "dynbc/verify.hpp"

int main(int argc, char** argv) {
    dynbc::verify::Options opts;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) opts.quick = true;

    const auto results = dynbc::verify::run_all(opts, &std::cout);

    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;

    if (failures > 0) {
        std::cout << failures << " criterion(s) FAILED\n";
        return 1;
    }
    std::cout << "all " << results.size() << " criteria passed\n";
    return 0;
}
