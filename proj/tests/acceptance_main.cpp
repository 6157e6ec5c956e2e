// Runs the full acceptance battery and prints one pass/fail line per
// criterion. Exit status 0 means every criterion passed.
#include <cstdio>
#include <vector>

#include "diffcomp/acceptance.hpp"

int main() {
    using namespace diffcomp::acceptance;
    const std::vector<CriterionResult> results = run_acceptance({});
    for (const CriterionResult& r : results) std::printf("%s\n", format_line(r).c_str());
    const bool ok = all_passed(results);
    std::printf("acceptance gate: %s\n", ok ? "all criteria passed" : "FAILURES PRESENT");
    return ok ? 0 : 1;
}
