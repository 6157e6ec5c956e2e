#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "diffcomp/errors.hpp"
#include "diffcomp/harness.hpp"
#include "diffcomp/report.hpp"
#include "diffcomp/scenario.hpp"
#include "diffcomp/text_config.hpp"

#ifndef DIFFCOMP_SOURCE_DIR
#define DIFFCOMP_SOURCE_DIR "."
#endif

using diffcomp::SpecError;
using namespace diffcomp::harness;

namespace {

Scenario scenario_from_text(const std::string& text) {
    return scenario_from_config(parse_config(text, "inline"), "inline");
}

const char* kFastQuadratic = R"(
name unit_fast_quadratic
theorem driftless
dim 1
x0 [0]
payoff { kind quadratic params [1] weights [1] convex true }
model_x { drift { kind constant values [0] } dispersion { kind constant values [1] } }
model_y { drift { kind constant values [0] } dispersion { kind constant values [1.2] } }
plan { horizon 1 steps 16 paths 30000 seed 77 }
expect holds
)";

const char* kFastAbs = R"(
name unit_fast_abs
theorem driftless
dim 1
x0 [0]
payoff { kind abs weights [1] convex true }
model_x { drift { kind constant values [0] } dispersion { kind constant values [1] } }
model_y { drift { kind constant values [0] } dispersion { kind constant values [1.4142135623730951] } }
plan { horizon 1 steps 16 paths 30000 seed 78 }
expected_delta 0.33049460629264737
expect holds
)";

std::string temp_file(const char* stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("structured text parses scalars, lists, blocks and comments") {
    const ConfigBlock b = parse_config(
        "alpha 1.5  # trailing comment\n"
        "beta { gamma [1, 2.5, 3] delta hello }\n"
        "flag on\n",
        "unit");
    CHECK(require_number(b, "alpha", "unit") == doctest::Approx(1.5));
    const ConfigBlock& inner = require_block(b, "beta", "unit");
    CHECK(require_list(inner, "gamma", "unit").size() == 3);
    CHECK(require_list(inner, "gamma", "unit")[1] == doctest::Approx(2.5));
    CHECK(require_string(inner, "delta", "unit") == "hello");
    CHECK(get_bool(b, "flag", false));
    CHECK(get_bool(b, "missing", true));
    CHECK(find_key(b, "absent") == nullptr);

    CHECK_THROWS_AS(require_string(b, "absent", "unit"), SpecError);
    CHECK_THROWS_AS(require_list(b, "alpha", "unit"), SpecError); // wrong shape
    CHECK_THROWS_AS(parse_config("open {", "unit"), SpecError);
    CHECK_THROWS_AS(parse_config("stray }", "unit"), SpecError);
    CHECK_THROWS_AS(parse_config("lone-key", "unit"), SpecError);
}

TEST_CASE("theorem kind names round-trip") {
    CHECK(theorem_kind_from_string("driftless") == TheoremKind::Driftless);
    CHECK(theorem_kind_from_string("drifted") == TheoremKind::Drifted);
    CHECK(to_string(TheoremKind::Drifted) == "drifted");
    CHECK_THROWS_AS(theorem_kind_from_string("sideways"), SpecError);
}

TEST_CASE("bundled scenario file loads with every declared setting") {
    const std::string path =
        std::string(DIFFCOMP_SOURCE_DIR) + "/data/scenarios/thm1_abs_1d.scn";
    const Scenario s = load_scenario_file(path);
    CHECK(s.name == "thm1_abs_1d");
    CHECK(s.theorem == TheoremKind::Driftless);
    CHECK(s.dim == 1);
    CHECK(s.x0[0] == 0.0);
    CHECK(s.payoff.declared_convex);
    CHECK_FALSE(s.payoff.declared_nondecreasing);
    CHECK(s.plan.paths == 200000);
    CHECK(s.plan.steps == 64);
    CHECK(s.pde.enabled);
    CHECK(s.pde.nodes == 257);
    CHECK(s.pde.boundary == diffcomp::pde::BoundaryPolicy::ExactGaussian);
    CHECK_FALSE(s.mollify.enabled);
    CHECK(s.has_expected_delta);
    CHECK(s.expected_delta == doctest::Approx(0.33049460629264737).epsilon(1e-15));
    CHECK(s.expect == "holds");
    CHECK(s.model_y.dispersion.eval(s.x0)(0, 0) ==
          doctest::Approx(1.4142135623730951).epsilon(1e-15));
}

TEST_CASE("bundled suite files resolve their scenario lists") {
    const std::string path = std::string(DIFFCOMP_SOURCE_DIR) + "/data/suites/theorem1.suite";
    const SuiteSpec suite = load_suite_file(path);
    CHECK(suite.name == "theorem1");
    CHECK(suite.scenario_paths.size() == 12);
    for (const std::string& p : suite.scenario_paths) CHECK(std::filesystem::exists(p));
}

TEST_CASE("missing required scenario keys raise errors that name the origin") {
    CHECK_THROWS_AS(scenario_from_text("name x\ntheorem driftless\ndim 1\nx0 [0]\n"),
                    SpecError);
    bool threw = false;
    try {
        scenario_from_text("theorem driftless");
    } catch (const SpecError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("name") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("a dominated pair certifies and matches its reference difference") {
    const Scenario s = scenario_from_text(kFastAbs);
    const ComparisonReport r = run_scenario(s, RunOptions{0, true});
    CHECK(r.verdict == "holds");
    CHECK(r.z > 3.0);
    CHECK(r.hypotheses.all_ok());
    CHECK(r.hypotheses.diffusion_order_ok);
    CHECK(r.hypotheses.drift_zero_ok);
    CHECK(r.hypotheses.payoff_convex_ok);
    CHECK(r.hypotheses.growth_ok);
    CHECK(r.has_expected_delta);
    CHECK(r.expected_delta_ok);
    CHECK(std::abs(r.delta - 0.33049460629264737) <= 4.0 * r.se_delta);
    CHECK_FALSE(r.pde.requested);
    CHECK(r.theorem == "driftless");
}

TEST_CASE("payoff weights can be rescaled into the profile without changing a bit") {
    // f(<2c, y>) with quadratic scale q/4 equals f(<c, y>) with scale q
    // exactly in floating point, because the rescaling is by powers of two.
    const char* scaled = R"(
name unit_fast_quadratic_scaled
theorem driftless
dim 1
x0 [0]
payoff { kind quadratic params [0.25] weights [2] convex true }
model_x { drift { kind constant values [0] } dispersion { kind constant values [1] } }
model_y { drift { kind constant values [0] } dispersion { kind constant values [1.2] } }
plan { horizon 1 steps 16 paths 30000 seed 77 }
expect holds
)";
    const ComparisonReport a = run_scenario(scenario_from_text(kFastQuadratic));
    const ComparisonReport b = run_scenario(scenario_from_text(scaled));
    CHECK(a.delta == b.delta);
    CHECK(a.se_delta == b.se_delta);
    CHECK(a.mean_x == b.mean_x);
    CHECK(a.mean_y == b.mean_y);
    CHECK(a.verdict == "holds");
    CHECK(b.verdict == "holds");
}

TEST_CASE("a concave profile reverses the ordering and is reported as such") {
    const char* text = R"(
name unit_nonconvex
theorem driftless
dim 1
x0 [0]
payoff { kind neg-quadratic weights [1] convex false }
model_x { drift { kind constant values [0] } dispersion { kind constant values [1] } }
model_y { drift { kind constant values [0] } dispersion { kind constant values [1.2] } }
plan { horizon 1 steps 16 paths 30000 seed 79 }
expect violated
)";
    const ComparisonReport r = run_scenario(scenario_from_text(text));
    CHECK(r.verdict == "violated");
    CHECK(r.z < -10.0);
    CHECK_FALSE(r.hypotheses.payoff_convex_ok);
    CHECK_FALSE(r.hypotheses.all_ok());
}

TEST_CASE("a reversed diffusion order produces a violation without certification") {
    const char* text = R"(
name unit_reversed
theorem driftless
dim 1
x0 [0]
payoff { kind abs weights [1] convex true }
model_x { drift { kind constant values [0] } dispersion { kind constant values [1.4142135623730951] } }
model_y { drift { kind constant values [0] } dispersion { kind constant values [1] } }
plan { horizon 1 steps 16 paths 30000 seed 80 }
expect violated
)";
    const ComparisonReport r = run_scenario(scenario_from_text(text));
    CHECK(r.verdict == "violated");
    CHECK(r.z < -10.0);
    CHECK_FALSE(r.hypotheses.diffusion_order_ok);
    CHECK(r.hypotheses.payoff_convex_ok);
}

TEST_CASE("grid cross-check confirms the sampled expectations") {
    const char* text = R"(
name unit_pde_cross
theorem driftless
dim 1
x0 [0]
payoff { kind abs weights [1] convex true }
model_x { drift { kind constant values [0] } dispersion { kind constant values [1] } }
model_y { drift { kind constant values [0] } dispersion { kind constant values [1.4142135623730951] } }
plan { horizon 1 steps 16 paths 30000 seed 81 }
pde { radius 6 nodes 65 boundary exact-gaussian }
expect holds
)";
    const ComparisonReport r = run_scenario(scenario_from_text(text));
    CHECK(r.pde.requested);
    CHECK(r.pde.ran);
    CHECK(r.pde.consistent_with_mc);
    CHECK(r.pde.skip_reason.empty());
    CHECK(r.pde.core_gap_min > 0.0);
    CHECK(std::abs(r.pde.value_x - r.mean_x) <= 4.0 * r.se_x + r.pde.tol);
    CHECK(std::abs(r.pde.value_y - r.mean_y) <= 4.0 * r.se_y + r.pde.tol);
    CHECK(r.verdict == "holds");

    // the master switch suppresses the cross-check without touching the rest
    const ComparisonReport quiet =
        run_scenario(scenario_from_text(text), RunOptions{0, false});
    CHECK(quiet.pde.requested);
    CHECK_FALSE(quiet.pde.ran);
    CHECK(quiet.verdict == "holds");
}

TEST_CASE("reports round-trip through json and hash independently of runtime") {
    ComparisonReport r = run_scenario(scenario_from_text(kFastAbs));
    const std::string with_runtime = report_to_json(r, true);
    const ComparisonReport back = report_from_json_text(with_runtime);
    CHECK(canonical_content(back) == canonical_content(r));
    CHECK(back.scenario_name == r.scenario_name);
    CHECK(back.delta == r.delta);
    CHECK(back.hypotheses.all_ok() == r.hypotheses.all_ok());

    ComparisonReport slow = r;
    slow.runtime_seconds = 1e9;
    CHECK(canonical_content(slow) == canonical_content(r));
    CHECK(report_to_json(r, false).find("runtime_seconds") == std::string::npos);
    CHECK(report_to_json(r, true).find("runtime_seconds") != std::string::npos);

    const std::string path = temp_file("diffcomp_report_roundtrip.json");
    write_report_file(path, r);
    const ComparisonReport from_disk = read_report_file(path);
    std::remove(path.c_str());
    CHECK(canonical_content(from_disk) == canonical_content(r));

    CHECK(csv_header() == "name,delta,se,z,verdict");
    const std::string row = csv_row(r);
    CHECK(row.find(r.scenario_name) == 0);
    CHECK(row.find("holds") != std::string::npos);
}

TEST_CASE("fnv-1a hashes match the reference vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64("a") == 12638187200555641996ULL);
    CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}

TEST_CASE("suites aggregate verdicts and check expectations") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "diffcomp_suite_unit").string();
    std::filesystem::create_directories(dir);
    write_text(dir + "/fast_abs.scn", kFastAbs);
    write_text(dir + "/fast_quadratic.scn", kFastQuadratic);
    write_text(dir + "/unit.suite",
               "name unit\nscenario fast_abs.scn\nscenario fast_quadratic.scn\n");

    const SuiteSpec spec = load_suite_file(dir + "/unit.suite");
    CHECK(spec.scenario_paths.size() == 2);
    const SuiteReport suite = run_suite(spec);
    CHECK(suite.suite_name == "unit");
    CHECK(suite.reports.size() == 2);
    CHECK(suite.holds == 2);
    CHECK(suite.violated == 0);
    CHECK(suite.indeterminate == 0);
    CHECK_FALSE(suite.certified_violation);
    CHECK(suite.expectation_failures.empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("counterexample constructions demonstrate that dropped hypotheses bite") {
    SearchOptions opt;
    opt.seed = 5;

    const CounterexampleReport nonconvex =
        run_counterexample(CounterexampleKind::NonconvexPayoff, opt);
    CHECK(nonconvex.demonstrated);
    CHECK(nonconvex.delta == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(nonconvex.z < -5.0);

    const CounterexampleReport nonmonotone =
        run_counterexample(CounterexampleKind::NonmonotoneDrift, opt);
    CHECK(nonmonotone.demonstrated);
    CHECK(nonmonotone.delta == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("randomized search with hypotheses enforced finds nothing") {
    SearchOptions opt;
    opt.attempts = 10;
    opt.paths = 20000;
    opt.seed = 7;
    const CounterexampleReport r =
        run_counterexample(CounterexampleKind::MultivariateSearch, opt);
    CHECK_FALSE(r.found);
    CHECK_FALSE(r.demonstrated);
    CHECK(r.attempts == 10);
    CHECK(r.detail.find("no violation") != std::string::npos);
    CHECK(r.z > -5.0);

    CHECK(counterexample_kind_from_string("multivariate-search") ==
          CounterexampleKind::MultivariateSearch);
    CHECK(to_string(CounterexampleKind::NonconvexPayoff) == "nonconvex-payoff");
    CHECK_THROWS_AS(counterexample_kind_from_string("bogus"), SpecError);
}

} // TEST_SUITE("harness")
