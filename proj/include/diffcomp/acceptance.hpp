#pragma once

#include <string>
#include <vector>

namespace diffcomp::acceptance {

// One verification criterion of the release gate. `detail` carries the
// measured quantities so a failing line is diagnosable on its own.
struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int threads = 0;        // 0 = hardware default
    std::string data_dir;   // bundled scenario corpus; empty = source tree default
};

// Runs the complete gate in order. Each criterion is timed and never throws:
// an exception inside one criterion marks it failed with the message as
// detail, and the remaining criteria still run.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

bool all_passed(const std::vector<CriterionResult>& results);

// "criterion  3 [PASS] counterexample battery: ..." one line per entry.
std::string format_line(const CriterionResult& r);

} // namespace diffcomp::acceptance
