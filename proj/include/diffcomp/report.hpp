#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace diffcomp::harness {

// Outcomes of the numerical hypothesis verification that gates a verdict.
// A claim the scenario never declared counts as not ok: the comparison
// statement only certifies anything when every hypothesis is both declared
// and confirmed by the probes.
struct HypothesisReport {
    bool diffusion_order_ok = false; // rho rho^T - sigma sigma^T PSD on samples
    bool drift_zero_ok = true;       // driftless statement: both drifts vanish
    bool drift_order_ok = true;      // drifted statement: nu - mu >= 0 on samples
    bool payoff_convex_ok = false;
    bool payoff_monotone_ok = true; // required by the drifted statement only
    bool growth_ok = false;
    double worst_eigenvalue = 0.0; // most negative eigenvalue seen in the order scan
    double worst_drift_gap = 0.0;
    double lambda_min_x = 0.0; // smallest diffusion eigenvalue sampled, per side
    double lambda_min_y = 0.0;

    bool all_ok() const {
        return diffusion_order_ok && drift_zero_ok && drift_order_ok && payoff_convex_ok &&
               payoff_monotone_ok && growth_ok;
    }
};

struct PdeCross {
    bool requested = false;
    bool ran = false;
    double value_x = 0.0;
    double value_y = 0.0;
    double delta = 0.0;
    double coarse_delta = 0.0;
    double tol = 0.0; // Richardson-style: 10 |fine - coarse| + 1e-6
    double core_gap_min = 0.0; // min over the core box of the grid gap u_y - u_x
    bool consistent_with_mc = false;
    std::string skip_reason;
};

struct ComparisonReport {
    std::string scenario_name;
    std::string theorem; // "driftless" or "drifted"
    int dim = 1;
    double horizon = 0.0;
    int steps = 0;
    std::int64_t paths = 0;
    std::uint64_t seed = 0;

    bool mollified = false;
    double mollify_epsilon = 0.0;
    double mollify_radius = 0.0;

    double mean_x = 0.0, se_x = 0.0;
    double mean_y = 0.0, se_y = 0.0;
    double delta = 0.0, se_delta = 0.0;
    double z = 0.0; // delta / se_delta, capped at +/- 1e12 when se_delta = 0

    std::string verdict; // "holds", "indeterminate" or "violated"
    HypothesisReport hypotheses;
    PdeCross pde;

    bool has_expected_delta = false;
    double expected_delta = 0.0;
    bool expected_delta_ok = true;

    std::vector<std::string> annotations;
    double runtime_seconds = 0.0; // excluded from the canonical content
};

// JSON round trip. The canonical form drops runtime, so two runs of the same
// configuration hash identically regardless of machine speed or threads.
std::string report_to_json(const ComparisonReport& report, bool include_runtime = true);
ComparisonReport report_from_json_text(const std::string& text);
std::string canonical_content(const ComparisonReport& report);

void write_report_file(const std::string& path, const ComparisonReport& report);
ComparisonReport read_report_file(const std::string& path);

// One line per scenario for spreadsheet-friendly summaries.
std::string csv_header();
std::string csv_row(const ComparisonReport& report);

// FNV-1a 64-bit content hash used by the output manifest.
std::uint64_t fnv1a64(const std::string& bytes);

} // namespace diffcomp::harness
