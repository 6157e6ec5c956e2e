// Command-line front end: run single comparisons or whole suites, probe the
// integrator, check the kernel identities, inspect the smoothing transform,
// hunt for counterexamples, and run the full release gate.
//
// Exit codes: 0 success, 1 a verification failed (ordering refuted, reference
// missed, gate red), 2 usage or runtime error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "diffcomp/acceptance.hpp"
#include "diffcomp/errors.hpp"
#include "diffcomp/harness.hpp"
#include "diffcomp/kernels.hpp"
#include "diffcomp/mollify.hpp"
#include "diffcomp/pde.hpp"
#include "diffcomp/report.hpp"
#include "diffcomp/scenario.hpp"
#include "diffcomp/sim.hpp"

#ifndef DIFFCOMP_SOURCE_DIR
#define DIFFCOMP_SOURCE_DIR "."
#endif

namespace {

using namespace diffcomp;

struct CommonFlags {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::int64_t paths = 0;
    int threads = 0;
    std::string out_dir;
    bool force_pde = false;
    bool no_pde = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--seed", f.seed, "override the scenario seed")
        ->each([&f](const std::string&) { f.seed_set = true; });
    cmd->add_option("--paths", f.paths, "override the sampled path count");
    cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", f.out_dir,
                    "output directory for reports (default: env DIFFCOMP_OUT)");
    cmd->add_flag("--pde", f.force_pde, "force the grid cross-check on");
    cmd->add_flag("--no-pde", f.no_pde, "skip the grid cross-check");
}

std::string resolve_out(const CommonFlags& f) {
    if (!f.out_dir.empty()) return f.out_dir;
    if (const char* env = std::getenv("DIFFCOMP_OUT")) return env;
    return {};
}

void apply_overrides(harness::Scenario& sc, const CommonFlags& f) {
    if (f.seed_set) sc.plan.seed = f.seed;
    if (f.paths > 0) sc.plan.paths = f.paths;
    if (f.force_pde) sc.pde.enabled = true;
    // --no-pde is handled through RunOptions so the report still records
    // that the cross-check was declined rather than never requested.
}

void print_report(const harness::ComparisonReport& r) {
    std::printf("%-24s %-9s delta % .6e  se %.3e  z % .3e\n", r.scenario_name.c_str(),
                r.verdict.c_str(), r.delta, r.se_delta, r.z);
    if (r.has_expected_delta)
        std::printf("%-24s reference % .6e  gap % .3e  %s\n", "", r.expected_delta,
                    r.delta - r.expected_delta, r.expected_delta_ok ? "ok" : "MISSED");
    if (r.pde.ran)
        std::printf("%-24s grid delta % .6e  tol %.3e  core gap min % .3e  %s\n", "",
                    r.pde.delta, r.pde.tol, r.pde.core_gap_min,
                    r.pde.consistent_with_mc ? "consistent" : "DISAGREES");
    else if (!r.pde.skip_reason.empty())
        std::printf("%-24s grid cross-check skipped: %s\n", "", r.pde.skip_reason.c_str());
    for (const std::string& a : r.annotations) std::printf("%-24s note: %s\n", "", a.c_str());
}

void write_manifest(const std::string& dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& files,
                    const std::string& canonical_all) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["content_hash"] = [&] {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(harness::fnv1a64(canonical_all)));
        return std::string(buf);
    }();
    m["files"] = nlohmann::ordered_json::array();
    for (const auto& [name, hash] : files)
        m["files"].push_back({{"name", name}, {"hash", hash}});
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw SpecError("cannot write manifest in " + dir);
    out << m.dump(2) << "\n";
}

std::string hash_hex(const std::string& content) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(harness::fnv1a64(content)));
    return buf;
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
    harness::Scenario sc = harness::load_scenario_file(path);
    apply_overrides(sc, flags);
    const harness::RunOptions opt{flags.threads, !flags.no_pde};
    const harness::ComparisonReport rep = harness::run_scenario(sc, opt);
    print_report(rep);

    const std::string out = resolve_out(flags);
    if (!out.empty()) {
        std::filesystem::create_directories(out);
        const std::string file = out + "/" + rep.scenario_name + ".json";
        harness::write_report_file(file, rep);
        const std::string canon = harness::canonical_content(rep);
        write_manifest(out, "run " + path, {{rep.scenario_name + ".json", hash_hex(canon)}},
                       canon);
        std::printf("report written to %s\n", file.c_str());
    }

    bool failed = !sc.expect.empty() && sc.expect != rep.verdict;
    if (rep.has_expected_delta && !rep.expected_delta_ok) failed = true;
    if (rep.pde.ran && !rep.pde.consistent_with_mc) failed = true;
    if (rep.verdict == "violated" && rep.hypotheses.all_ok()) failed = true;
    return failed ? 1 : 0;
}

int cmd_suite(const std::string& path, const CommonFlags& flags) {
    const harness::SuiteSpec spec = harness::load_suite_file(path);
    harness::SuiteReport suite;
    if (flags.seed_set || flags.paths > 0 || flags.force_pde) {
        // Overrides require loading each scenario individually.
        suite.suite_name = spec.name;
        for (const std::string& sp : spec.scenario_paths) {
            harness::Scenario sc = harness::load_scenario_file(sp);
            apply_overrides(sc, flags);
            harness::ComparisonReport rep =
                harness::run_scenario(sc, harness::RunOptions{flags.threads, !flags.no_pde});
            if (rep.verdict == "holds")
                ++suite.holds;
            else if (rep.verdict == "violated")
                ++suite.violated;
            else
                ++suite.indeterminate;
            if (rep.verdict == "violated" && rep.hypotheses.all_ok())
                suite.certified_violation = true;
            if (!sc.expect.empty() && sc.expect != rep.verdict)
                suite.expectation_failures.push_back(sc.name + ": expected " + sc.expect +
                                                     ", got " + rep.verdict);
            if (rep.has_expected_delta && !rep.expected_delta_ok)
                suite.expectation_failures.push_back(sc.name + ": reference difference missed");
            if (rep.pde.ran && !rep.pde.consistent_with_mc)
                suite.expectation_failures.push_back(sc.name + ": grid cross-check disagreed");
            suite.reports.push_back(std::move(rep));
        }
    } else {
        suite = harness::run_suite(spec, harness::RunOptions{flags.threads, !flags.no_pde});
    }

    for (const harness::ComparisonReport& r : suite.reports) print_report(r);
    std::printf("suite %s: %d holds, %d indeterminate, %d violated\n",
                suite.suite_name.c_str(), suite.holds, suite.indeterminate, suite.violated);
    for (const std::string& f : suite.expectation_failures)
        std::printf("expectation failure: %s\n", f.c_str());

    const std::string out = resolve_out(flags);
    if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::vector<std::pair<std::string, std::string>> files;
        std::string canonical_all;
        std::ofstream csv(out + "/" + suite.suite_name + ".csv");
        csv << harness::csv_header() << "\n";
        for (const harness::ComparisonReport& r : suite.reports) {
            const std::string file = r.scenario_name + ".json";
            harness::write_report_file(out + "/" + file, r);
            const std::string canon = harness::canonical_content(r);
            files.emplace_back(file, hash_hex(canon));
            canonical_all += canon;
            csv << harness::csv_row(r) << "\n";
        }
        write_manifest(out, "suite " + path, files, canonical_all);
        std::printf("reports written to %s\n", out.c_str());
    }

    return (suite.certified_violation || !suite.expectation_failures.empty()) ? 1 : 0;
}

int cmd_probe_sde(const std::string& kind, std::int64_t paths, std::uint64_t seed) {
    sde::ProbeModel model;
    if (kind == "gbm")
        model = {sde::ProbeKind::GeometricBM, 0.05, 0.5, 1.0, 1.0};
    else if (kind == "abm")
        model = {sde::ProbeKind::ArithmeticBM, 0.3, 0.6, 0.5, 1.0};
    else
        throw SpecError("unknown probe model '" + kind + "' (use gbm or abm)");
    const sde::ProbeResult res =
        sde::strong_error_probe(model, {16, 32, 64, 128, 256}, paths, seed);
    std::printf("%8s %12s %14s %14s\n", "steps", "dt", "strong error", "weak error");
    for (const sde::ProbePoint& p : res.points)
        std::printf("%8d %12.6g %14.6e %14.6e\n", p.steps, p.dt, p.strong_error, p.weak_error);
    std::printf("strong slope %.4f, weak slope %.4f, max strong error %.3e\n",
                res.strong_slope, res.weak_slope, res.max_strong_error);
    return 0;
}

int cmd_check_kernels(int configs, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    int failures = 0;
    for (int i = 0; i < configs; ++i) {
        const int d = 1 + i % 3;
        kernels::Mat G(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) G(r, c) = uni(gen);
        const kernels::Mat a = 0.5 * (G * G.transpose()) +
                               (0.25 + 0.375 * (uni(gen) + 1.0)) *
                                   kernels::Mat::Identity(d, d);
        kernels::Vec b = kernels::Vec::Zero(d);
        if (i % 2 == 1)
            for (int r = 0; r < d; ++r) b[r] = uni(gen);
        const double t = 0.25 * (uni(gen) + 1.0);
        const double s = t + 0.05 + 0.5 * (uni(gen) + 1.0);
        kernels::Vec x(d), y(d);
        for (int r = 0; r < d; ++r) x[r] = 2.0 * uni(gen);
        for (int r = 0; r < d; ++r) y[r] = 2.0 * uni(gen);
        const kernels::ConstKernel k(a, b, kernels::Direction::Forward);
        const kernels::DualityReport rep = kernels::duality_check(k, t, x, s, y, 1e-10);
        worst = std::max(worst, rep.max_residual);
        if (!rep.ok) ++failures;
    }
    std::printf("duality: %d configurations, worst residual %.3e, %d failures\n", configs,
                worst, failures);

    const kernels::ConstKernel heat(kernels::Mat::Constant(1, 1, 0.5),
                                    kernels::Vec::Zero(1), kernels::Direction::Forward);
    const double norm_res = kernels::normalization_residual(heat, 0.5, kernels::Vec::Zero(1),
                                                            4096);
    std::printf("normalization residual at dt 0.5: %.3e\n", norm_res);
    const kernels::GaussianBoundReport ok_rep =
        kernels::gaussian_bound_check(heat, {1.0, 0.25}, 0.01, 4.0, 6.0, 33);
    const kernels::GaussianBoundReport bad_rep =
        kernels::gaussian_bound_check(heat, {1.0, 1.0}, 0.01, 4.0, 6.0, 33);
    std::printf("bound (1, 1/4): %s (worst ratio %.3e)\n", ok_rep.ok ? "holds" : "violated",
                ok_rep.worst_ratio);
    std::printf("bound (1, 1):   %s (worst ratio %.3e at dt %.3g)\n",
                bad_rep.ok ? "holds" : "violated", bad_rep.worst_ratio, bad_rep.witness_dt);
    return (failures == 0 && ok_rep.ok && !bad_rep.ok) ? 0 : 1;
}

int cmd_mollify_demo(const std::string& profile, double epsilon, double radius,
                     const std::string& out_dir) {
    convex::ScalarFunction f;
    if (profile == "abs")
        f = convex::ScalarFunction(convex::FunctionKind::Abs);
    else if (profile == "relu")
        f = convex::ScalarFunction(convex::FunctionKind::Relu);
    else if (profile == "pwl")
        f = convex::ScalarFunction(convex::FunctionKind::PiecewiseLinear,
                                   {-2, 2.2, -1, 1, 0, 0.4, 1, 1.2, 2, 2.6});
    else
        throw SpecError("unknown profile '" + profile + "' (use abs, relu or pwl)");

    const convex::MollifiedFunction m = convex::mollify(f, epsilon, radius);
    double sup = 0.0;
    for (int i = 0; i <= 4096; ++i) {
        const double z = -radius + 2.0 * radius * i / 4096.0;
        sup = std::max(sup, std::abs(m.value(z) - f(z)));
    }
    std::printf("profile %s, accuracy %.3g on radius %.3g\n", profile.c_str(), epsilon,
                radius);
    std::printf("smoothing width %.6g, bump weight %.6g, bump rate %.6g\n",
                m.smoothing_width, m.bump_weight, m.bump_rate);
    std::printf("measured sup-error %.3e, support radius %.6g\n", sup, m.support_radius());

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::string file = out_dir + "/mollify_" + profile + ".csv";
        std::ofstream csv(file);
        csv << "z,value,d1,d2\n";
        const double lo = -(radius + 2.5), hi = radius + 2.5;
        for (int i = 0; i <= 2000; ++i) {
            const double z = lo + (hi - lo) * i / 2000.0;
            char line[160];
            std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g\n", z, m.value(z),
                          m.d1(z), m.d2(z));
            csv << line;
        }
        std::printf("profile table written to %s\n", file.c_str());
    }
    return 0;
}

int cmd_search(const std::string& kind_name, const harness::SearchOptions& opt) {
    const harness::CounterexampleKind kind =
        harness::counterexample_kind_from_string(kind_name);
    const harness::CounterexampleReport rep = harness::run_counterexample(kind, opt);
    std::printf("%s: delta % .6e  se %.3e  z % .3e  (%d attempts)\n", rep.kind.c_str(),
                rep.delta, rep.se, rep.z, rep.attempts);
    std::printf("%s\n", rep.detail.c_str());
    if (kind == harness::CounterexampleKind::MultivariateSearch)
        return rep.found ? 1 : 0; // finding one would refute the statement
    return rep.demonstrated ? 0 : 1; // the constructions must demonstrate reversal
}

int cmd_acceptance(int threads, const std::string& data_dir) {
    acceptance::AcceptanceOptions opt;
    opt.threads = threads;
    opt.data_dir = data_dir;
    const std::vector<acceptance::CriterionResult> results = acceptance::run_acceptance(opt);
    for (const acceptance::CriterionResult& r : results)
        std::printf("%s\n", acceptance::format_line(r).c_str());
    const bool ok = acceptance::all_passed(results);
    std::printf("gate: %s\n", ok ? "all criteria passed" : "FAILURES PRESENT");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification laboratory for ordered diffusion comparisons"};
    app.require_subcommand(1);

    CommonFlags run_flags, suite_flags;
    std::string run_path, suite_path;
    CLI::App* run_cmd = app.add_subcommand("run", "run one scenario file");
    run_cmd->add_option("scenario", run_path, "scenario file")->required();
    add_common(run_cmd, run_flags);

    CLI::App* suite_cmd = app.add_subcommand("suite", "run every scenario in a suite file");
    suite_cmd->add_option("suite", suite_path, "suite file")->required();
    add_common(suite_cmd, suite_flags);

    std::string probe_model = "gbm";
    std::int64_t probe_paths = 20000;
    std::uint64_t probe_seed = 3333;
    CLI::App* probe_cmd =
        app.add_subcommand("probe-sde", "measure integrator convergence on closed-form models");
    probe_cmd->add_option("--model", probe_model, "gbm or abm");
    probe_cmd->add_option("--paths", probe_paths, "paths per rung");
    probe_cmd->add_option("--seed", probe_seed, "stream seed");

    int kernel_configs = 100;
    std::uint64_t kernel_seed = 20240817;
    CLI::App* kernel_cmd =
        app.add_subcommand("check-kernels", "duality, normalization and bound checks");
    kernel_cmd->add_option("--configs", kernel_configs, "random configurations");
    kernel_cmd->add_option("--seed", kernel_seed, "generator seed");

    std::string moll_profile = "abs";
    double moll_eps = 0.01, moll_radius = 5.0;
    std::string moll_out;
    CLI::App* moll_cmd =
        app.add_subcommand("mollify-demo", "build and inspect a smoothed profile");
    moll_cmd->add_option("--profile", moll_profile, "abs, relu or pwl");
    moll_cmd->add_option("--epsilon", moll_eps, "accuracy budget");
    moll_cmd->add_option("--radius", moll_radius, "core radius");
    moll_cmd->add_option("--out", moll_out, "directory for a CSV table");

    std::string search_kind = "multivariate-search";
    harness::SearchOptions search_opt;
    CLI::App* search_cmd = app.add_subcommand(
        "search-counterexample", "drop a hypothesis or hunt for a violation");
    search_cmd->add_option("--kind", search_kind,
                           "nonconvex-payoff, nonmonotone-drift or multivariate-search");
    search_cmd->add_option("--attempts", search_opt.attempts, "search attempts");
    search_cmd->add_option("--paths", search_opt.paths, "paths per attempt");
    search_cmd->add_option("--seed", search_opt.seed, "search seed");
    search_cmd->add_option("--threads", search_opt.threads, "worker threads");

    int acc_threads = 0;
    std::string acc_data;
    CLI::App* acc_cmd = app.add_subcommand("acceptance", "run the full release gate");
    acc_cmd->add_option("--threads", acc_threads, "worker threads");
    acc_cmd->add_option("--data", acc_data, "scenario corpus directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_path, run_flags);
        if (suite_cmd->parsed()) return cmd_suite(suite_path, suite_flags);
        if (probe_cmd->parsed()) return cmd_probe_sde(probe_model, probe_paths, probe_seed);
        if (kernel_cmd->parsed()) return cmd_check_kernels(kernel_configs, kernel_seed);
        if (moll_cmd->parsed())
            return cmd_mollify_demo(moll_profile, moll_eps, moll_radius, moll_out);
        if (search_cmd->parsed()) return cmd_search(search_kind, search_opt);
        if (acc_cmd->parsed()) return cmd_acceptance(acc_threads, acc_data);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
