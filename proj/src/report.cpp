#include "diffcomp/report.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "diffcomp/errors.hpp"

namespace diffcomp::harness {

namespace {
using nlohmann::ordered_json;

ordered_json hypotheses_to_json(const HypothesisReport& h) {
    return ordered_json{{"diffusion_order_ok", h.diffusion_order_ok},
                        {"drift_zero_ok", h.drift_zero_ok},
                        {"drift_order_ok", h.drift_order_ok},
                        {"payoff_convex_ok", h.payoff_convex_ok},
                        {"payoff_monotone_ok", h.payoff_monotone_ok},
                        {"growth_ok", h.growth_ok},
                        {"worst_eigenvalue", h.worst_eigenvalue},
                        {"worst_drift_gap", h.worst_drift_gap},
                        {"lambda_min_x", h.lambda_min_x},
                        {"lambda_min_y", h.lambda_min_y}};
}

HypothesisReport hypotheses_from_json(const ordered_json& j) {
    HypothesisReport h;
    h.diffusion_order_ok = j.at("diffusion_order_ok").get<bool>();
    h.drift_zero_ok = j.at("drift_zero_ok").get<bool>();
    h.drift_order_ok = j.at("drift_order_ok").get<bool>();
    h.payoff_convex_ok = j.at("payoff_convex_ok").get<bool>();
    h.payoff_monotone_ok = j.at("payoff_monotone_ok").get<bool>();
    h.growth_ok = j.at("growth_ok").get<bool>();
    h.worst_eigenvalue = j.at("worst_eigenvalue").get<double>();
    h.worst_drift_gap = j.at("worst_drift_gap").get<double>();
    h.lambda_min_x = j.at("lambda_min_x").get<double>();
    h.lambda_min_y = j.at("lambda_min_y").get<double>();
    return h;
}

ordered_json pde_to_json(const PdeCross& p) {
    return ordered_json{{"requested", p.requested},
                        {"ran", p.ran},
                        {"value_x", p.value_x},
                        {"value_y", p.value_y},
                        {"delta", p.delta},
                        {"coarse_delta", p.coarse_delta},
                        {"tol", p.tol},
                        {"core_gap_min", p.core_gap_min},
                        {"consistent_with_mc", p.consistent_with_mc},
                        {"skip_reason", p.skip_reason}};
}

PdeCross pde_from_json(const ordered_json& j) {
    PdeCross p;
    p.requested = j.at("requested").get<bool>();
    p.ran = j.at("ran").get<bool>();
    p.value_x = j.at("value_x").get<double>();
    p.value_y = j.at("value_y").get<double>();
    p.delta = j.at("delta").get<double>();
    p.coarse_delta = j.at("coarse_delta").get<double>();
    p.tol = j.at("tol").get<double>();
    p.core_gap_min = j.at("core_gap_min").get<double>();
    p.consistent_with_mc = j.at("consistent_with_mc").get<bool>();
    p.skip_reason = j.at("skip_reason").get<std::string>();
    return p;
}

ordered_json report_to_ordered_json(const ComparisonReport& r, bool include_runtime) {
    ordered_json j{{"scenario", r.scenario_name},
                   {"theorem", r.theorem},
                   {"dim", r.dim},
                   {"horizon", r.horizon},
                   {"steps", r.steps},
                   {"paths", r.paths},
                   {"seed", r.seed},
                   {"mollified", r.mollified},
                   {"mollify_epsilon", r.mollify_epsilon},
                   {"mollify_radius", r.mollify_radius},
                   {"mean_x", r.mean_x},
                   {"se_x", r.se_x},
                   {"mean_y", r.mean_y},
                   {"se_y", r.se_y},
                   {"delta", r.delta},
                   {"se_delta", r.se_delta},
                   {"z", r.z},
                   {"verdict", r.verdict},
                   {"hypotheses", hypotheses_to_json(r.hypotheses)},
                   {"pde", pde_to_json(r.pde)},
                   {"has_expected_delta", r.has_expected_delta},
                   {"expected_delta", r.expected_delta},
                   {"expected_delta_ok", r.expected_delta_ok},
                   {"annotations", r.annotations}};
    if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

} // namespace

std::string report_to_json(const ComparisonReport& report, bool include_runtime) {
    return report_to_ordered_json(report, include_runtime).dump(2);
}

ComparisonReport report_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw SpecError(std::string("report is not valid JSON: ") + e.what());
    }
    ComparisonReport r;
    try {
        r.scenario_name = j.at("scenario").get<std::string>();
        r.theorem = j.at("theorem").get<std::string>();
        r.dim = j.at("dim").get<int>();
        r.horizon = j.at("horizon").get<double>();
        r.steps = j.at("steps").get<int>();
        r.paths = j.at("paths").get<std::int64_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.mollified = j.at("mollified").get<bool>();
        r.mollify_epsilon = j.at("mollify_epsilon").get<double>();
        r.mollify_radius = j.at("mollify_radius").get<double>();
        r.mean_x = j.at("mean_x").get<double>();
        r.se_x = j.at("se_x").get<double>();
        r.mean_y = j.at("mean_y").get<double>();
        r.se_y = j.at("se_y").get<double>();
        r.delta = j.at("delta").get<double>();
        r.se_delta = j.at("se_delta").get<double>();
        r.z = j.at("z").get<double>();
        r.verdict = j.at("verdict").get<std::string>();
        r.hypotheses = hypotheses_from_json(j.at("hypotheses"));
        r.pde = pde_from_json(j.at("pde"));
        r.has_expected_delta = j.at("has_expected_delta").get<bool>();
        r.expected_delta = j.at("expected_delta").get<double>();
        r.expected_delta_ok = j.at("expected_delta_ok").get<bool>();
        r.annotations = j.at("annotations").get<std::vector<std::string>>();
        if (j.contains("runtime_seconds"))
            r.runtime_seconds = j.at("runtime_seconds").get<double>();
    } catch (const ordered_json::exception& e) {
        throw SpecError(std::string("report JSON is missing fields: ") + e.what());
    }
    return r;
}

std::string canonical_content(const ComparisonReport& report) {
    return report_to_json(report, false);
}

void write_report_file(const std::string& path, const ComparisonReport& report) {
    std::ofstream out(path);
    if (!out) throw SpecError("cannot open report file for writing: " + path);
    out << report_to_json(report, true) << "\n";
    if (!out) throw SpecError("failed while writing report file: " + path);
}

ComparisonReport read_report_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open report file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json_text(buf.str());
}

std::string csv_header() { return "name,delta,se,z,verdict"; }

std::string csv_row(const ComparisonReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << report.scenario_name << ',' << report.delta << ',' << report.se_delta << ','
        << report.z << ',' << report.verdict;
    return out.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace diffcomp::harness
