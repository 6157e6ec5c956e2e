#include "diffcomp/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "diffcomp/errors.hpp"
#include "diffcomp/harness.hpp"
#include "diffcomp/kernels.hpp"
#include "diffcomp/mollify.hpp"
#include "diffcomp/model.hpp"
#include "diffcomp/payoff.hpp"
#include "diffcomp/pde.hpp"
#include "diffcomp/report.hpp"
#include "diffcomp/rng.hpp"
#include "diffcomp/scenario.hpp"
#include "diffcomp/sim.hpp"

#ifndef DIFFCOMP_SOURCE_DIR
#define DIFFCOMP_SOURCE_DIR "."
#endif

namespace diffcomp::acceptance {
namespace {

using convex::FunctionKind;
using convex::MollifiedFunction;
using convex::PayoffSpec;
using convex::ScalarFunction;
using model::CoefficientField;
using model::DiffusionModel;
using model::Mat;
using model::Vec;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Accumulates requirements; remembers the first violated one for the detail
// line so a red criterion explains itself.
struct Gate {
    bool ok = true;
    int checks = 0;
    std::string first_failure;

    void require(bool cond, const std::string& what) {
        ++checks;
        if (!cond) {
            if (ok) first_failure = what;
            ok = false;
        }
    }
};

struct SuiteCache {
    bool t1_ran = false, t2_ran = false;
    harness::SuiteReport t1, t2;
    std::string t1_error, t2_error;
};

DiffusionModel const_model(int dim, const Vec& x0, const Mat& drift, const Mat& dispersion) {
    return DiffusionModel(dim, x0,
                          CoefficientField::constant(dim, drift),
                          CoefficientField::constant(dim, dispersion));
}

// ---------------------------------------------------------------------------
// 1 & 2: certification suites
// ---------------------------------------------------------------------------

CriterionResult check_suite_criterion(int id, const std::string& title,
                                      const harness::SuiteReport& suite, int expected_count,
                                      std::int64_t expected_paths, double seconds,
                                      double time_budget) {
    CriterionResult res;
    res.id = id;
    res.title = title;
    Gate g;

    g.require(static_cast<int>(suite.reports.size()) == expected_count,
              "expected " + std::to_string(expected_count) + " scenarios, ran " +
                  std::to_string(suite.reports.size()));
    double worst_gap_se = 0.0;
    for (const harness::ComparisonReport& r : suite.reports) {
        g.require(r.verdict == "holds", r.scenario_name + " reported " + r.verdict);
        g.require(r.z >= -3.0, r.scenario_name + " z-score " + fmt(r.z) + " below -3");
        g.require(r.paths == expected_paths,
                  r.scenario_name + " ran " + std::to_string(r.paths) + " paths");
        if (r.has_expected_delta) {
            const double tol = 4.0 * r.se_delta + (r.mollified ? 3.0 * r.mollify_epsilon : 0.0);
            const double gap = std::abs(r.delta - r.expected_delta);
            g.require(gap <= tol, r.scenario_name + " reference gap " + fmt(gap) +
                                      " exceeds " + fmt(tol));
            if (r.se_delta > 0.0 && !r.mollified)
                worst_gap_se = std::max(worst_gap_se, gap / r.se_delta);
        }
    }
    for (const std::string& f : suite.expectation_failures) g.require(false, f);
    g.require(seconds <= time_budget,
              "suite took " + fmt(seconds) + " s, budget " + fmt(time_budget) + " s");

    res.pass = g.ok;
    res.detail = g.ok ? std::to_string(expected_count) + "/" + std::to_string(expected_count) +
                            " holds, worst reference gap " + fmt(worst_gap_se) +
                            " SE, suite time " + fmt(seconds) + " s"
                      : g.first_failure;
    return res;
}

const harness::ComparisonReport* find_report(const harness::SuiteReport& suite,
                                             const std::string& name) {
    for (const auto& r : suite.reports)
        if (r.scenario_name == name) return &r;
    return nullptr;
}

void check_pinned_delta(Gate& g, const harness::SuiteReport& suite, const std::string& name,
                        double pinned) {
    const harness::ComparisonReport* r = find_report(suite, name);
    g.require(r != nullptr, name + " missing from suite");
    if (!r) return;
    const double gap = std::abs(r->delta - pinned);
    g.require(gap <= 4.0 * r->se_delta, name + " differs from " + fmt(pinned) + " by " +
                                            fmt(gap) + " > 4 SE = " + fmt(4.0 * r->se_delta));
}

// ---------------------------------------------------------------------------
// 3: counterexample battery
// ---------------------------------------------------------------------------

CriterionResult criterion_counterexamples(const AcceptanceOptions& opt,
                                          const std::string& data_dir) {
    CriterionResult res;
    res.id = 3;
    res.title = "counterexample battery";
    Gate g;

    const harness::SuiteSpec spec = harness::load_suite_file(data_dir + "/suites/negative.suite");
    const harness::SuiteReport suite =
        harness::run_suite(spec, harness::RunOptions{opt.threads, true});
    g.require(suite.reports.size() == 3,
              "expected 3 scenarios, ran " + std::to_string(suite.reports.size()));
    double worst_abs_z = std::numeric_limits<double>::infinity();
    for (const harness::ComparisonReport& r : suite.reports) {
        g.require(r.verdict == "violated", r.scenario_name + " reported " + r.verdict);
        g.require(r.paths == 100000,
                  r.scenario_name + " ran " + std::to_string(r.paths) + " paths");
    }
    for (const std::string& name : {"neg_nonconvex", "neg_nonmonotone_drift"}) {
        const harness::ComparisonReport* r = find_report(suite, name);
        g.require(r != nullptr, std::string(name) + " missing");
        if (!r) continue;
        g.require(std::abs(r->z) >= 10.0,
                  std::string(name) + " |z| = " + fmt(std::abs(r->z)) + " < 10");
        const double gap = std::abs(r->delta - (-1.0));
        g.require(gap <= 4.0 * r->se_delta, std::string(name) + " differs from -1 by " +
                                                fmt(gap) + " > 4 SE = " + fmt(4.0 * r->se_delta));
        worst_abs_z = std::min(worst_abs_z, std::abs(r->z));
    }
    for (const std::string& f : suite.expectation_failures) g.require(false, f);

    res.pass = g.ok;
    res.detail = g.ok ? "3/3 violated, weakest |z| " + fmt(worst_abs_z) : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 4: coupling null test
// ---------------------------------------------------------------------------

CriterionResult criterion_coupling_null(const AcceptanceOptions& opt) {
    CriterionResult res;
    res.id = 4;
    res.title = "coupling null test";
    Gate g;

    const int dim = 2;
    Vec x0(dim);
    x0 << 0.4, -0.3;
    const CoefficientField drift = CoefficientField::from_params(
        model::FieldKind::TrigPerturbed, dim, dim, 1,
        {0.1, 0.05, 0.7, -0.4, 0.2, -0.05, 0.04, 0.3, 0.9, -0.1});
    const CoefficientField dispersion = CoefficientField::from_params(
        model::FieldKind::TrigPerturbed, dim, dim, dim,
        {0.7, 0.15, 0.9, 0.4, 0.1,
         0.1, 0.05, 0.2, -0.3, 0.0,
         0.0, 0.0, 0.0, 0.0, 0.0,
         0.8, 0.1, 0.3, 1.1, -0.2});
    const DiffusionModel m(dim, x0, drift, dispersion);
    Vec w(dim);
    w << 1.0, 0.7;
    const PayoffSpec payoff(w, ScalarFunction(FunctionKind::Abs), true, false, 1.0, 1.0);
    const sde::SimPlan plan{1.0, 32, 20000, 424242};
    const sde::SimResult sim = sde::simulate_pair(m, m, payoff, payoff, plan, opt.threads);

    g.require(sim.flagged == 0, std::to_string(sim.flagged) + " paths flagged non-finite");
    std::int64_t mismatches = 0;
    for (const sde::PairedSample& s : sim.samples) {
        const std::uint64_t* a = reinterpret_cast<const std::uint64_t*>(&s.payoff_x);
        const std::uint64_t* b = reinterpret_cast<const std::uint64_t*>(&s.payoff_y);
        if (*a != *b) ++mismatches;
    }
    g.require(mismatches == 0,
              std::to_string(mismatches) + " of " + std::to_string(sim.samples.size()) +
                  " paths differ between identically-driven copies");
    const sde::MCEstimate diff = sde::estimate(sim, sde::Series::Diff);
    g.require(diff.mean == 0.0 && diff.se == 0.0,
              "difference estimate not exactly zero: mean " + fmt(diff.mean));

    res.pass = g.ok;
    res.detail = g.ok ? std::to_string(sim.samples.size()) +
                            " paths bit-identical across the coupled pair"
                      : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 5: MC vs PDE cross-validation (reuses the suite runs of criteria 1-2)
// ---------------------------------------------------------------------------

CriterionResult criterion_cross_validation(const SuiteCache& cache) {
    CriterionResult res;
    res.id = 5;
    res.title = "sampling vs grid cross-validation";
    Gate g;

    g.require(cache.t1_ran, "driftless suite unavailable: " + cache.t1_error);
    g.require(cache.t2_ran, "drifted suite unavailable: " + cache.t2_error);
    int crosschecked = 0;
    int gap_checked = 0;
    double worst_probe_margin = 0.0; // largest |probe - mean| / (4 SE + tol)
    double worst_core_gap = std::numeric_limits<double>::infinity();
    for (const harness::SuiteReport* suite : {&cache.t1, &cache.t2}) {
        for (const harness::ComparisonReport& r : suite->reports) {
            if (!r.pde.requested || r.dim > 2) continue;
            g.require(r.pde.ran,
                      r.scenario_name + " grid cross-check skipped: " + r.pde.skip_reason);
            if (!r.pde.ran) continue;
            ++crosschecked;
            const double bx = 4.0 * r.se_x + r.pde.tol;
            const double by = 4.0 * r.se_y + r.pde.tol;
            const double gx = std::abs(r.pde.value_x - r.mean_x);
            const double gy = std::abs(r.pde.value_y - r.mean_y);
            g.require(gx <= bx, r.scenario_name + " lower expectation: grid " +
                                    fmt(r.pde.value_x) + " vs sampled " + fmt(r.mean_x) +
                                    " gap " + fmt(gx) + " > " + fmt(bx));
            g.require(gy <= by, r.scenario_name + " upper expectation: grid " +
                                    fmt(r.pde.value_y) + " vs sampled " + fmt(r.mean_y) +
                                    " gap " + fmt(gy) + " > " + fmt(by));
            g.require(r.pde.consistent_with_mc,
                      r.scenario_name + " difference estimates disagree");
            if (bx > 0.0) worst_probe_margin = std::max(worst_probe_margin, gx / bx);
            if (by > 0.0) worst_probe_margin = std::max(worst_probe_margin, gy / by);
            if (r.hypotheses.all_ok()) {
                ++gap_checked;
                g.require(r.pde.core_gap_min >= -r.pde.tol,
                          r.scenario_name + " grid gap field dips to " +
                              fmt(r.pde.core_gap_min) + " below -tol = " + fmt(-r.pde.tol));
                worst_core_gap = std::min(worst_core_gap, r.pde.core_gap_min);
            }
        }
    }
    g.require(crosschecked >= 15, "only " + std::to_string(crosschecked) +
                                      " cross-checked scenarios; the corpus should supply 17");
    g.require(gap_checked >= 15,
              "only " + std::to_string(gap_checked) + " certified gap fields");

    res.pass = g.ok;
    res.detail = g.ok ? std::to_string(crosschecked) + " scenarios cross-checked, worst probe" +
                            " gap at " + fmt(100.0 * worst_probe_margin) +
                            "% of bound, smallest certified core gap " + fmt(worst_core_gap)
                      : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 6: propagation of convexity / monotonicity through the grid solver
// ---------------------------------------------------------------------------

CriterionResult criterion_propagation(const AcceptanceOptions& opt) {
    CriterionResult res;
    res.id = 6;
    res.title = "convexity and monotonicity propagation";
    Gate g;
    std::string summary;

    struct FieldCase {
        std::string name;
        bool convex_case; // else: monotone case
        DiffusionModel model;
        PayoffSpec payoff;
        pde::GridSpec grid;
    };
    std::vector<FieldCase> cases;

    { // 1D convex: smoothed |z|, volatility sqrt(2), one time unit.
        auto m = std::make_shared<const MollifiedFunction>(
            convex::mollify(ScalarFunction(FunctionKind::Abs), 0.01, 18.0));
        cases.push_back({"convex-1d", true,
                         const_model(1, Vec::Zero(1), Mat::Zero(1, 1),
                                     Mat::Constant(1, 1, std::sqrt(2.0))),
                         PayoffSpec(Vec::Ones(1), ScalarFunction::mollified(m), true, false,
                                    30.0, 1.0),
                         pde::GridSpec{1, 8.0, 257, 0, 1.0}});
    }
    { // 2D convex: smoothed |z| of the coordinate sum, identity dispersion,
      // four time units so the slice is deep in the smooth regime.
        auto m = std::make_shared<const MollifiedFunction>(
            convex::mollify(ScalarFunction(FunctionKind::Abs), 0.01, 24.0));
        cases.push_back({"convex-2d", true,
                         const_model(2, Vec::Zero(2), Mat::Zero(2, 1), Mat::Identity(2, 2)),
                         PayoffSpec(Vec::Ones(2), ScalarFunction::mollified(m), true, false,
                                    30.0, 1.0),
                         pde::GridSpec{2, 2.0, 161, 0, 4.0}});
    }
    // 1D monotone: raw hinge with positive drift.
    cases.push_back({"monotone-1d", false,
                     const_model(1, Vec::Zero(1), Mat::Constant(1, 1, 0.3), Mat::Ones(1, 1)),
                     PayoffSpec(Vec::Ones(1), ScalarFunction(FunctionKind::Relu), true, true,
                                1.0, 1.0),
                     pde::GridSpec{1, 4.0, 257, 0, 1.0}});
    { // 2D monotone: raw hinge of the coordinate sum, componentwise positive drift.
        Mat mu(2, 1);
        mu << 0.2, 0.1;
        cases.push_back({"monotone-2d", false,
                         const_model(2, Vec::Zero(2), mu, Mat::Identity(2, 2)),
                         PayoffSpec(Vec::Ones(2), ScalarFunction(FunctionKind::Relu), true,
                                    true, 1.0, 1.0),
                         pde::GridSpec{2, 4.0, 129, 0, 1.0}});
    }

    for (const FieldCase& fc : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const pde::ValueField field = pde::solve_backward(
            fc.model, fc.payoff, fc.grid, pde::BoundaryPolicy::ExactGaussian, opt.threads);
        const pde::PropagationReport rep = pde::propagation_report(field);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        g.require(secs <= 60.0, fc.name + " took " + fmt(secs) + " s, budget 60 s");
        if (fc.convex_case) {
            const double conv =
                fc.grid.dim == 1 ? rep.min_second_diff : rep.min_hessian_eig;
            g.require(conv >= -1e-5,
                      fc.name + " convexity floor " + fmt(conv) + " below -1e-5");
            g.require(rep.min_trace >= -1e-5,
                      fc.name + " trace floor " + fmt(rep.min_trace) + " below -1e-5");
            summary += fc.name + " floor " + fmt(conv) + "; ";
        } else {
            g.require(rep.min_gradient >= -1e-5,
                      fc.name + " gradient floor " + fmt(rep.min_gradient) + " below -1e-5");
            summary += fc.name + " floor " + fmt(rep.min_gradient) + "; ";
        }
    }

    res.pass = g.ok;
    res.detail = g.ok ? summary.substr(0, summary.size() - 2) : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 7: kernel duality, second-derivative transfer, off-diagonal bound
// ---------------------------------------------------------------------------

CriterionResult criterion_kernels(const AcceptanceOptions&) {
    CriterionResult res;
    res.id = 7;
    res.title = "kernel duality, transfer and bound checks";
    Gate g;

    // Duality pairing over 100 random configurations, alternating drift on/off.
    std::mt19937_64 gen(20240817ULL);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst_duality = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int d = 1 + i % 3;
        Mat G(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) G(r, c) = uni(gen);
        const Mat a = 0.5 * (G * G.transpose()) +
                      (0.25 + 0.375 * (uni(gen) + 1.0)) * Mat::Identity(d, d);
        Vec b = Vec::Zero(d);
        if (i % 2 == 1)
            for (int r = 0; r < d; ++r) b[r] = uni(gen);
        const double t = 0.25 * (uni(gen) + 1.0);
        const double s = t + 0.05 + 0.5 * (uni(gen) + 1.0);
        Vec x(d), y(d);
        for (int r = 0; r < d; ++r) x[r] = 2.0 * uni(gen);
        for (int r = 0; r < d; ++r) y[r] = 2.0 * uni(gen);
        const kernels::ConstKernel k(a, b, kernels::Direction::Forward);
        const kernels::DualityReport rep = kernels::duality_check(k, t, x, s, y, 1e-10);
        worst_duality = std::max(worst_duality, rep.max_residual);
        g.require(rep.ok, "duality residual " + fmt(rep.max_residual) +
                              " above 1e-10 at configuration " + std::to_string(i));
    }

    // Second-derivative transfer on the smoothed battery.
    double worst_transfer = 0.0;
    const std::vector<std::pair<std::string, ScalarFunction>> profiles = {
        {"abs", ScalarFunction(FunctionKind::Abs)},
        {"relu", ScalarFunction(FunctionKind::Relu)},
        {"pwl", ScalarFunction(FunctionKind::PiecewiseLinear,
                               {-2, 2.2, -1, 1, 0, 0.4, 1, 1.2, 2, 2.6})},
    };
    for (const auto& [pname, profile] : profiles) {
        const MollifiedFunction m = convex::mollify(profile, 0.01, 6.0);
        const kernels::ConstKernel k1(Mat::Constant(1, 1, 0.6), Vec::Constant(1, 0.2),
                                      kernels::Direction::Forward);
        // 4096 nodes resolve the f'' spikes (width ~ 0.005) on the ~15-wide
        // probe box; at 2048 the trapezoid rule aliases them to ~1e-4.
        const kernels::HessianTransferReport rep = kernels::hessian_transfer_check(
            k1, m, Vec::Ones(1), 0.0, Vec::Constant(1, 0.3), 0.75, 4096, 1e-5);
        worst_transfer = std::max(worst_transfer, rep.max_abs_diff);
        g.require(rep.ok, "1d transfer gap " + fmt(rep.max_abs_diff) + " above 1e-5 for " +
                              pname + " profile");
    }
    {
        const MollifiedFunction m =
            convex::mollify(ScalarFunction(FunctionKind::Abs), 0.01, 6.0);
        Mat a(2, 2);
        a << 0.5, 0.1, 0.1, 0.4;
        Vec b(2), x(2), w(2);
        b << 0.1, -0.05;
        x << 0.2, -0.1;
        w << 1.0, 0.8;
        const kernels::ConstKernel k2(a, b, kernels::Direction::Forward);
        const kernels::HessianTransferReport rep =
            kernels::hessian_transfer_check(k2, m, w, 0.0, x, 0.6, 512, 1e-5);
        worst_transfer = std::max(worst_transfer, rep.max_abs_diff);
        g.require(rep.ok, "2d transfer gap " + fmt(rep.max_abs_diff) + " above 1e-5");
    }

    // Off-diagonal Gaussian bound for the dimensionless heat kernel a = 1/2:
    // the pair (c*, lambda*) = (1, 1/4) dominates, lambda* = 1 cannot.
    const kernels::ConstKernel heat(Mat::Constant(1, 1, 0.5), Vec::Zero(1),
                                    kernels::Direction::Forward);
    const kernels::GaussianBoundReport pass_rep =
        kernels::gaussian_bound_check(heat, {1.0, 0.25}, 0.01, 4.0, 6.0, 33);
    g.require(pass_rep.ok, "bound with decay 1/4 violated, worst ratio " +
                               fmt(pass_rep.worst_ratio));
    const kernels::GaussianBoundReport fail_rep =
        kernels::gaussian_bound_check(heat, {1.0, 1.0}, 0.01, 4.0, 6.0, 33);
    g.require(!fail_rep.ok && fail_rep.worst_ratio > 1.0,
              "bound with decay 1 unexpectedly holds (worst ratio " +
                  fmt(fail_rep.worst_ratio) + ")");
    g.require(fail_rep.witness_offset.size() == 1 && fail_rep.witness_dt > 0.0,
              "failing bound carries no witness");

    res.pass = g.ok;
    res.detail = g.ok ? "worst duality residual " + fmt(worst_duality) +
                            ", worst transfer gap " + fmt(worst_transfer) +
                            ", bound witness ratio " + fmt(fail_rep.worst_ratio) + " at dt " +
                            fmt(fail_rep.witness_dt)
                      : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 8: strict-convex smoothing battery
// ---------------------------------------------------------------------------

CriterionResult criterion_mollifier(const AcceptanceOptions&) {
    CriterionResult res;
    res.id = 8;
    res.title = "strict-convex smoothing battery";
    Gate g;

    const std::vector<std::pair<std::string, ScalarFunction>> profiles = {
        {"abs", ScalarFunction(FunctionKind::Abs)},
        {"relu", ScalarFunction(FunctionKind::Relu)},
        {"pwl5", ScalarFunction(FunctionKind::PiecewiseLinear,
                                {-2, 2.2, -1, 1, 0, 0.4, 1, 1.2, 2, 2.6})},
    };
    double worst_sup = 0.0;       // worst sup-error relative to its epsilon
    double smallest_d2 = std::numeric_limits<double>::infinity();
    int combos = 0;
    for (const auto& [pname, profile] : profiles) {
        for (const double eps : {0.1, 0.01}) {
            for (const double radius : {2.0, 5.0}) {
                ++combos;
                const std::string tag =
                    pname + " eps " + fmt(eps) + " radius " + fmt(radius);
                const MollifiedFunction m = convex::mollify(profile, eps, radius);

                double sup = 0.0;
                for (int i = 0; i <= 4096; ++i) {
                    const double z = -radius + 2.0 * radius * i / 4096.0;
                    sup = std::max(sup, std::abs(m.value(z) - profile(z)));
                }
                g.require(sup <= eps,
                          tag + ": sup-error " + fmt(sup) + " exceeds " + fmt(eps));
                worst_sup = std::max(worst_sup, sup / eps);

                double min_d2 = std::numeric_limits<double>::infinity();
                for (int i = 0; i < 1000; ++i) {
                    const double z = -radius + 2.0 * radius * (i + 0.5) / 1000.0;
                    min_d2 = std::min(min_d2, m.d2(z));
                }
                g.require(min_d2 > 0.0,
                          tag + ": second derivative " + fmt(min_d2) + " not positive");
                smallest_d2 = std::min(smallest_d2, min_d2);

                for (const double z : {radius + 2.0 + 1e-9, radius + 2.5, radius + 6.0}) {
                    for (const double signed_z : {z, -z}) {
                        const bool zero = m.value(signed_z) == 0.0 &&
                                          m.d1(signed_z) == 0.0 && m.d2(signed_z) == 0.0;
                        g.require(zero, tag + ": not exactly zero at " + fmt(signed_z));
                    }
                }
            }
        }
    }
    g.require(combos == 12, "expected 12 combinations");

    res.pass = g.ok;
    res.detail = g.ok ? "12 combinations: worst sup-error at " + fmt(100.0 * worst_sup) +
                            "% of budget, smallest core curvature " + fmt(smallest_d2)
                      : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 9: integrator validity
// ---------------------------------------------------------------------------

CriterionResult criterion_integrator(const AcceptanceOptions&) {
    CriterionResult res;
    res.id = 9;
    res.title = "integrator validity probes";
    Gate g;

    const std::vector<int> ladder = {16, 32, 64, 128, 256};
    const sde::ProbeResult gbm = sde::strong_error_probe(
        sde::ProbeModel{sde::ProbeKind::GeometricBM, 0.05, 0.5, 1.0, 1.0}, ladder, 20000, 3333);
    g.require(gbm.strong_slope >= 0.35 && gbm.strong_slope <= 0.65,
              "multiplicative-noise strong slope " + fmt(gbm.strong_slope) +
                  " outside [0.35, 0.65]");

    const sde::ProbeResult abm = sde::strong_error_probe(
        sde::ProbeModel{sde::ProbeKind::ArithmeticBM, 0.3, 0.6, 0.5, 1.0}, ladder, 20000, 4444);
    g.require(abm.max_strong_error <= 1e-12,
              "additive-noise error " + fmt(abm.max_strong_error) + " above 1e-12");

    // Moments of the normal stream against CLT bands (4 sigma at n = 1e6).
    const std::int64_t n = 1000000;
    long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = sde::normal_draw(777, static_cast<std::uint64_t>(i), 0, 0);
        const long double x2 = static_cast<long double>(x) * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
    }
    const double m1 = static_cast<double>(s1 / n);
    const double m2 = static_cast<double>(s2 / n);
    const double m3 = static_cast<double>(s3 / n);
    const double m4 = static_cast<double>(s4 / n);
    const double root_n = std::sqrt(static_cast<double>(n));
    g.require(std::abs(m1) <= 4.0 / root_n, "mean " + fmt(m1) + " outside CLT band");
    g.require(std::abs(m2 - 1.0) <= 4.0 * std::sqrt(2.0) / root_n,
              "variance " + fmt(m2) + " outside CLT band");
    g.require(std::abs(m3) <= 4.0 * std::sqrt(15.0) / root_n,
              "third moment " + fmt(m3) + " outside CLT band");
    g.require(std::abs(m4 - 3.0) <= 4.0 * std::sqrt(96.0) / root_n,
              "fourth moment " + fmt(m4) + " outside CLT band");

    res.pass = g.ok;
    res.detail = g.ok ? "strong slope " + fmt(gbm.strong_slope) + ", additive error " +
                            fmt(abm.max_strong_error) + ", moments (" + fmt(m1) + ", " +
                            fmt(m2) + ", " + fmt(m3) + ", " + fmt(m4) + ")"
                      : g.first_failure;
    return res;
}

// ---------------------------------------------------------------------------
// 10: determinism across thread counts
// ---------------------------------------------------------------------------

CriterionResult criterion_determinism(const std::string& data_dir) {
    CriterionResult res;
    res.id = 10;
    res.title = "thread-count determinism";
    Gate g;

    int compared = 0;
    for (const std::string& name : {"thm1_abs_1d", "thm1_abs_2d"}) {
        const harness::Scenario sc =
            harness::load_scenario_file(data_dir + "/scenarios/" + name + ".scn");
        const harness::ComparisonReport one =
            harness::run_scenario(sc, harness::RunOptions{1, true});
        const harness::ComparisonReport four =
            harness::run_scenario(sc, harness::RunOptions{4, true});
        const std::string c1 = harness::canonical_content(one);
        const std::string c4 = harness::canonical_content(four);
        g.require(c1 == c4, name + ": canonical reports differ between 1 and 4 threads");
        ++compared;
    }

    res.pass = g.ok;
    res.detail = g.ok ? std::to_string(compared) +
                            " scenarios byte-identical at thread counts 1 and 4"
                      : g.first_failure;
    return res;
}

} // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    const std::string data_dir =
        options.data_dir.empty() ? std::string(DIFFCOMP_SOURCE_DIR) + "/data"
                                 : options.data_dir;
    std::vector<CriterionResult> out;
    SuiteCache cache;

    auto timed = [&out](CriterionResult r, const std::chrono::steady_clock::time_point& t0) {
        r.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    };
    auto guard = [&timed](int id, const std::string& title, auto&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            timed(body(), t0);
        } catch (const std::exception& e) {
            CriterionResult r;
            r.id = id;
            r.title = title;
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
            timed(std::move(r), t0);
        }
    };

    guard(1, "driftless certification suite", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const harness::SuiteSpec spec =
            harness::load_suite_file(data_dir + "/suites/theorem1.suite");
        cache.t1 = harness::run_suite(spec, harness::RunOptions{options.threads, true});
        cache.t1_ran = true;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CriterionResult r = check_suite_criterion(1, "driftless certification suite", cache.t1,
                                                  12, 200000, secs, 120.0);
        Gate g;
        g.ok = r.pass;
        g.first_failure = r.detail;
        check_pinned_delta(g, cache.t1, "thm1_abs_2d", 0.467390);
        check_pinned_delta(g, cache.t1, "thm1_quadratic_1d", 1.0);
        check_pinned_delta(g, cache.t1, "thm1_abs_1d", 0.330494);
        r.pass = g.ok;
        if (!g.ok) r.detail = g.first_failure;
        return r;
    });
    if (!cache.t1_ran && !out.empty()) cache.t1_error = out.back().detail;

    guard(2, "drifted certification suite", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const harness::SuiteSpec spec =
            harness::load_suite_file(data_dir + "/suites/theorem2.suite");
        cache.t2 = harness::run_suite(spec, harness::RunOptions{options.threads, true});
        cache.t2_ran = true;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CriterionResult r = check_suite_criterion(2, "drifted certification suite", cache.t2, 6,
                                                  200000, secs, 120.0);
        Gate g;
        g.ok = r.pass;
        g.first_failure = r.detail;
        check_pinned_delta(g, cache.t2, "thm2_relu_1d", 0.684390);
        r.pass = g.ok;
        if (!g.ok) r.detail = g.first_failure;
        return r;
    });
    if (!cache.t2_ran && out.size() >= 2) cache.t2_error = out.back().detail;

    guard(3, "counterexample battery",
          [&] { return criterion_counterexamples(options, data_dir); });
    guard(4, "coupling null test", [&] { return criterion_coupling_null(options); });
    guard(5, "sampling vs grid cross-validation",
          [&] { return criterion_cross_validation(cache); });
    guard(6, "convexity and monotonicity propagation",
          [&] { return criterion_propagation(options); });
    guard(7, "kernel duality, transfer and bound checks",
          [&] { return criterion_kernels(options); });
    guard(8, "strict-convex smoothing battery", [&] { return criterion_mollifier(options); });
    guard(9, "integrator validity probes", [&] { return criterion_integrator(options); });
    guard(10, "thread-count determinism", [&] { return criterion_determinism(data_dir); });
    return out;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return r.pass; });
}

std::string format_line(const CriterionResult& r) {
    char head[64];
    std::snprintf(head, sizeof(head), "criterion %2d [%s] ", r.id, r.pass ? "PASS" : "FAIL");
    char tail[32];
    std::snprintf(tail, sizeof(tail), "  (%.1f s)", r.seconds);
    return std::string(head) + r.title + " - " + r.detail + tail;
}

} // namespace diffcomp::acceptance
