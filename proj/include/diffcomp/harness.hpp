#pragma once

#include <string>
#include <vector>

#include "diffcomp/report.hpp"
#include "diffcomp/scenario.hpp"

namespace diffcomp::harness {

struct RunOptions {
    int threads = 0;       // 0 = hardware default
    bool allow_pde = true; // master switch for cross-checks on top of scenario settings
};

/// Full pipeline for one scenario: verify the declared hypotheses by numerical
// probes, smooth the payoff if requested, estimate the ordered difference by
// coupled Monte Carlo, optionally cross-check both expectations against the
// grid solver, and assemble the verdict.  The verdict describes the measured
// ordering; the hypothesis flags record whether the comparison statement was
// actually in force:
//   violated      - the difference is negative beyond three standard errors;
//                   with all hypotheses verified this refutes the statement,
//                   otherwise it merely shows what failing assumptions allow
//   holds         - not violated and every hypothesis verified
//   indeterminate - hypotheses unmet without a resolved reversal, a negative
//                   difference still within noise, or a grid/sampling conflict
ComparisonReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

struct SuiteReport {
    std::string suite_name;
    std::vector<ComparisonReport> reports;
    int holds = 0;
    int indeterminate = 0;
    int violated = 0;
    // A violation with all hypotheses verified; the suite exit status keys on it.
    bool certified_violation = false;
    std::vector<std::string> expectation_failures;
};

SuiteReport run_suite(const SuiteSpec& suite, const RunOptions& options = {});

// Deliberate hypothesis breakers: each drops exactly one assumption and shows
// the ordering reversing, which is evidence the assumptions carry weight.
enum class CounterexampleKind {
    NonconvexPayoff,   // concave profile, diffusion order kept
    NonmonotoneDrift,  // decreasing profile, drift order kept
    MultivariateSearch // randomized hunt for a violation with hypotheses kept
};

std::string to_string(CounterexampleKind kind);
CounterexampleKind counterexample_kind_from_string(const std::string& name);

struct SearchOptions {
    int attempts = 500;
    std::int64_t paths = 100000;
    std::uint64_t seed = 7;
    int threads = 0;
};

struct CounterexampleReport {
    std::string kind;
    bool demonstrated = false; // ordering reversed (the two constructions)
    bool found = false;        // search only: a certified violation surfaced
    double delta = 0.0;
    double se = 0.0;
    double z = 0.0;
    int attempts = 0;
    std::string detail;
};

CounterexampleReport run_counterexample(CounterexampleKind kind,
                                        const SearchOptions& options = {});

} // namespace diffcomp::harness
