#include "diffcomp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "diffcomp/errors.hpp"
#include "diffcomp/mollify.hpp"
#include "diffcomp/rng.hpp"

namespace diffcomp::harness {

namespace {

using convex::MollifiedFunction;
using convex::PayoffSpec;
using convex::ScalarFunction;
using model::Mat;
using model::Vec;

double capped_z(double delta, double se) {
    if (se > 0.0) return std::clamp(delta / se, -1e12, 1e12);
    if (delta == 0.0) return 0.0;
    return delta > 0.0 ? 1e12 : -1e12;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

// How far the coupled paths can plausibly wander, from the global coefficient
// bounds; the hypothesis probes cover this region.
double model_reach(const Scenario& sc) {
    double reach = 0.0;
    for (const model::DiffusionModel* m : {&sc.model_x, &sc.model_y}) {
        const double r = m->drift.bound() * sc.plan.horizon +
                         6.0 * m->dispersion.bound() * std::sqrt(sc.plan.horizon);
        reach = std::max(reach, r);
    }
    return reach;
}

} // namespace

ComparisonReport run_scenario(const Scenario& sc, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();

    ComparisonReport r;
    r.scenario_name = sc.name;
    r.theorem = to_string(sc.theorem);
    r.dim = sc.dim;
    r.horizon = sc.plan.horizon;
    r.steps = sc.plan.steps;
    r.paths = sc.plan.paths;
    r.seed = sc.plan.seed;

    const double reach = model_reach(sc);
    const double x0_max = sc.x0.size() ? sc.x0.cwiseAbs().maxCoeff() : 0.0;
    const double scan_radius = std::clamp(x0_max + reach, 2.0, 50.0);
    const double z_range = std::clamp(
        std::abs(sc.payoff.weights.dot(sc.x0)) + sc.payoff.weights.lpNorm<1>() * reach, 4.0,
        1e4);

    // --- hypothesis verification -------------------------------------------
    HypothesisReport& hyp = r.hypotheses;
    const model::OrderReport ord =
        model::order_scan(sc.model_x, sc.model_y, scan_radius, 256, sc.plan.seed ^ 0xa11ceULL);
    hyp.diffusion_order_ok = ord.diffusion_order_ok;
    hyp.worst_eigenvalue = ord.worst_eigenvalue;
    hyp.worst_drift_gap = ord.worst_drift_gap;
    if (!hyp.diffusion_order_ok)
        r.annotations.push_back("diffusion dominance fails: most negative eigenvalue " +
                                fmt(ord.worst_eigenvalue) + " on the sampled region");

    if (sc.theorem == TheoremKind::Driftless) {
        hyp.drift_zero_ok =
            sc.model_x.drift.is_constant_zero() && sc.model_y.drift.is_constant_zero();
        hyp.drift_order_ok = true;
        if (!hyp.drift_zero_ok)
            r.annotations.push_back(
                "the driftless statement requires vanishing drifts on both sides");
    } else {
        hyp.drift_zero_ok = true;
        hyp.drift_order_ok = ord.drift_order_ok;
        if (!hyp.drift_order_ok)
            r.annotations.push_back("drift dominance fails: most negative gap " +
                                    fmt(ord.worst_drift_gap) + " on the sampled region");
    }

    if (!sc.payoff.declared_convex) {
        hyp.payoff_convex_ok = false;
        r.annotations.push_back("payoff profile is not declared convex");
    } else {
        const convex::CheckResult cx =
            convex::convexity_check(sc.payoff.f, -z_range, z_range, 512);
        hyp.payoff_convex_ok = cx.ok;
        if (!cx.ok)
            r.annotations.push_back("declared convexity fails near z = " + fmt(cx.witness_z) +
                                    " (second difference " + fmt(cx.worst) + ")");
    }

    if (sc.theorem == TheoremKind::Drifted) {
        if (!sc.payoff.declared_nondecreasing) {
            hyp.payoff_monotone_ok = false;
            r.annotations.push_back(
                "the drifted statement requires a nondecreasing profile, none declared");
        } else {
            const convex::CheckResult mono =
                convex::monotonicity_check(sc.payoff.f, -z_range, z_range, 512);
            hyp.payoff_monotone_ok = mono.ok;
            if (!mono.ok)
                r.annotations.push_back("declared monotonicity fails near z = " +
                                        fmt(mono.witness_z) + " (first difference " +
                                        fmt(mono.worst) + ")");
        }
    } else {
        hyp.payoff_monotone_ok = true;
    }

    {
        const convex::CheckResult gr = convex::growth_check(
            sc.payoff.f, sc.payoff.growth_a, sc.payoff.growth_b, z_range, 512);
        hyp.growth_ok = gr.ok;
        if (!gr.ok)
            r.annotations.push_back("declared growth envelope fails near z = " +
                                    fmt(gr.witness_z) + " (margin " + fmt(gr.worst) + ")");
    }

    hyp.lambda_min_x =
        model::ellipticity_scan(sc.model_x, scan_radius, 128, sc.plan.seed ^ 0xe11ULL)
            .lambda_min;
    hyp.lambda_min_y =
        model::ellipticity_scan(sc.model_y, scan_radius, 128, sc.plan.seed ^ 0xe12ULL)
            .lambda_min;
    if (hyp.lambda_min_y <= 0.0)
        r.annotations.push_back(
            "dominating diffusion is degenerate somewhere on the sampled region");

    // Consistency of the declared family constants (throws on an internal bug).
    for (const model::CoefficientField* f :
         {&sc.model_x.drift, &sc.model_x.dispersion, &sc.model_y.drift, &sc.model_y.dispersion})
        model::lipschitz_probe(*f, scan_radius, 96, sc.plan.seed ^ 0x11bULL);

    // --- payoff smoothing ---------------------------------------------------
    PayoffSpec effective = sc.payoff;
    if (sc.mollify.enabled) {
        auto smoothed = std::make_shared<const MollifiedFunction>(
            convex::mollify(sc.payoff.f, sc.mollify.epsilon, sc.mollify.radius));
        effective.f = ScalarFunction::mollified(smoothed);
        r.mollified = true;
        r.mollify_epsilon = sc.mollify.epsilon;
        r.mollify_radius = sc.mollify.radius;
    }

    // --- coupled Monte Carlo ------------------------------------------------
    const sde::SimResult sim =
        sde::simulate_pair(sc.model_x, sc.model_y, effective, effective, sc.plan, opt.threads);
    const sde::MCEstimate ex = sde::estimate(sim, sde::Series::PayoffX);
    const sde::MCEstimate ey = sde::estimate(sim, sde::Series::PayoffY);
    const sde::MCEstimate ed = sde::estimate(sim, sde::Series::Diff);
    r.mean_x = ex.mean;
    r.se_x = ex.se;
    r.mean_y = ey.mean;
    r.se_y = ey.se;
    r.delta = ed.mean;
    r.se_delta = ed.se;
    r.z = capped_z(r.delta, r.se_delta);
    if (sim.flagged > 0)
        r.annotations.push_back(std::to_string(sim.flagged) +
                                " paths went non-finite and were excluded");

    // --- verdict ------------------------------------------------------------
    // The verdict describes the measured ordering; whether the comparison
    // statement was actually in force is tracked by the hypothesis flags.
    const bool hyp_ok = hyp.all_ok();
    if (r.delta < 0.0 && r.z < -3.0) {
        r.verdict = "violated";
        if (hyp_ok)
            r.annotations.push_back("ordering fails by " + fmt(-r.delta) + " at z = " +
                                    fmt(r.z) + " with all hypotheses verified");
        else
            r.annotations.push_back(
                "ordering reversed (z = " + fmt(r.z) +
                "), which is expected once the assumptions are dropped");
    } else if (!hyp_ok) {
        r.verdict = "indeterminate";
        r.annotations.push_back(
            "hypotheses unmet: the comparison statement is not in force here");
    } else if (r.delta < 0.0) {
        r.verdict = "indeterminate";
        r.annotations.push_back("difference is negative but within sampling noise");
    } else {
        r.verdict = "holds";
        if (r.z < 3.0)
            r.annotations.push_back(
                "difference is nonnegative but not separated from zero at three standard "
                "errors");
    }

    // --- closed-form target, when the scenario pins one ---------------------
    if (sc.has_expected_delta) {
        r.has_expected_delta = true;
        r.expected_delta = sc.expected_delta;
        const double tol =
            std::max(4.0 * r.se_delta, 1e-9) + (r.mollified ? 3.0 * sc.mollify.epsilon : 0.0);
        r.expected_delta_ok = std::abs(r.delta - sc.expected_delta) <= tol;
        if (!r.expected_delta_ok)
            r.annotations.push_back("measured difference " + fmt(r.delta) +
                                    " misses the reference value " + fmt(sc.expected_delta) +
                                    " beyond " + fmt(tol));
    }

    // --- independent grid cross-check ---------------------------------------
    r.pde.requested = sc.pde.enabled;
    if (sc.pde.enabled && !opt.allow_pde) {
        r.pde.skip_reason = "disabled by run options";
    } else if (sc.pde.enabled) {
        if (sc.dim > 2) {
            r.pde.skip_reason = "grid solver supports one or two dimensions";
            r.annotations.push_back("grid cross-check skipped: " + r.pde.skip_reason);
        } else {
            try {
                pde::GridSpec fine{sc.dim, sc.pde.radius, sc.pde.nodes, 0, sc.plan.horizon};
                pde::GridSpec coarse = fine;
                coarse.nodes_per_axis = std::max(5, (fine.nodes_per_axis + 1) / 2);
                const pde::ValueField fx =
                    pde::solve_backward(sc.model_x, effective, fine, sc.pde.boundary,
                                        opt.threads);
                const pde::ValueField fy =
                    pde::solve_backward(sc.model_y, effective, fine, sc.pde.boundary,
                                        opt.threads);
                const pde::ValueField cx =
                    pde::solve_backward(sc.model_x, effective, coarse, sc.pde.boundary,
                                        opt.threads);
                const pde::ValueField cy =
                    pde::solve_backward(sc.model_y, effective, coarse, sc.pde.boundary,
                                        opt.threads);
                r.pde.value_x = pde::probe_value(fx, sc.x0);
                r.pde.value_y = pde::probe_value(fy, sc.x0);
                r.pde.delta = r.pde.value_y - r.pde.value_x;
                r.pde.coarse_delta = pde::probe_value(cy, sc.x0) - pde::probe_value(cx, sc.x0);
                r.pde.core_gap_min = pde::delta_field(fx, fy).core_min;
                r.pde.tol = 10.0 * std::abs(r.pde.delta - r.pde.coarse_delta) + 1e-6;
                r.pde.consistent_with_mc =
                    std::abs(r.delta - r.pde.delta) <= r.pde.tol + 4.0 * r.se_delta;
                r.pde.ran = true;
                if (!r.pde.consistent_with_mc) {
                    r.annotations.push_back(
                        "grid solver and sampling disagree: grid " + fmt(r.pde.delta) +
                        " vs sampled " + fmt(r.delta) + " beyond tolerance " + fmt(r.pde.tol));
                    if (r.verdict == "holds") {
                        r.verdict = "indeterminate";
                        r.annotations.push_back(
                            "downgraded: the two independent estimates must agree before the "
                            "ordering is certified");
                    }
                }
            } catch (const SpecError& e) {
                r.pde.skip_reason = e.what();
                r.annotations.push_back(std::string("grid cross-check skipped: ") + e.what());
            }
        }
    }

    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

SuiteReport run_suite(const SuiteSpec& suite, const RunOptions& options) {
    SuiteReport out;
    out.suite_name = suite.name;
    for (const std::string& path : suite.scenario_paths) {
        const Scenario sc = load_scenario_file(path);
        ComparisonReport rep = run_scenario(sc, options);
        if (rep.verdict == "holds")
            ++out.holds;
        else if (rep.verdict == "violated")
            ++out.violated;
        else
            ++out.indeterminate;
        if (rep.verdict == "violated" && rep.hypotheses.all_ok())
            out.certified_violation = true;
        if (!sc.expect.empty() && sc.expect != rep.verdict)
            out.expectation_failures.push_back(sc.name + ": expected " + sc.expect + ", got " +
                                               rep.verdict);
        if (rep.has_expected_delta && !rep.expected_delta_ok)
            out.expectation_failures.push_back(sc.name + ": reference difference missed");
        if (rep.pde.ran && !rep.pde.consistent_with_mc)
            out.expectation_failures.push_back(sc.name + ": grid cross-check disagreed");
        out.reports.push_back(std::move(rep));
    }
    return out;
}

std::string to_string(CounterexampleKind kind) {
    switch (kind) {
    case CounterexampleKind::NonconvexPayoff: return "nonconvex-payoff";
    case CounterexampleKind::NonmonotoneDrift: return "nonmonotone-drift";
    case CounterexampleKind::MultivariateSearch: return "multivariate-search";
    }
    return "unknown";
}

CounterexampleKind counterexample_kind_from_string(const std::string& name) {
    if (name == "nonconvex-payoff") return CounterexampleKind::NonconvexPayoff;
    if (name == "nonmonotone-drift") return CounterexampleKind::NonmonotoneDrift;
    if (name == "multivariate-search") return CounterexampleKind::MultivariateSearch;
    throw SpecError("unknown counterexample kind '" + name + "'");
}

namespace {

CounterexampleReport run_nonconvex(const SearchOptions& opt) {
    using model::CoefficientField;
    const Vec x0 = Vec::Zero(1);
    const DiffusionModel mx(1, x0, CoefficientField::constant(1, Mat::Zero(1, 1)),
                            CoefficientField::constant(1, Mat::Identity(1, 1)));
    const DiffusionModel my(1, x0, CoefficientField::constant(1, Mat::Zero(1, 1)),
                            CoefficientField::constant(1, Mat::Constant(1, 1, std::sqrt(2.0))));
    PayoffSpec payoff(Vec::Ones(1), ScalarFunction(convex::FunctionKind::NegQuadratic), false,
                      false, 2.0, 2.0);
    sde::SimPlan plan{1.0, 64, 200000, opt.seed};
    const sde::SimResult sim = sde::simulate_pair(mx, my, payoff, payoff, plan, opt.threads);
    const sde::MCEstimate ed = sde::estimate(sim, sde::Series::Diff);

    CounterexampleReport rep;
    rep.kind = to_string(CounterexampleKind::NonconvexPayoff);
    rep.delta = ed.mean;
    rep.se = ed.se;
    rep.z = capped_z(ed.mean, ed.se);
    rep.attempts = 1;
    rep.demonstrated = ed.mean < 0.0 && rep.z < -5.0;
    rep.detail = "concave profile -z^2 with unit diffusion against sqrt(2) diffusion; the "
                 "closed-form difference is -1 and the sampled difference is " +
                 fmt(ed.mean) + " (z = " + fmt(rep.z) + ")";
    return rep;
}

CounterexampleReport run_nonmonotone(const SearchOptions& opt) {
    using model::CoefficientField;
    const Vec x0 = Vec::Zero(1);
    const DiffusionModel mx(1, x0, CoefficientField::constant(1, Mat::Zero(1, 1)),
                            CoefficientField::constant(1, Mat::Identity(1, 1)));
    const DiffusionModel my(1, x0, CoefficientField::constant(1, Mat::Ones(1, 1)),
                            CoefficientField::constant(1, Mat::Identity(1, 1)));
    PayoffSpec payoff(Vec::Ones(1), ScalarFunction(convex::FunctionKind::NegLinear), true, false,
                      2.0, 1.0);
    sde::SimPlan plan{1.0, 64, 100000, opt.seed};
    const sde::SimResult sim = sde::simulate_pair(mx, my, payoff, payoff, plan, opt.threads);
    const sde::MCEstimate ed = sde::estimate(sim, sde::Series::Diff);

    CounterexampleReport rep;
    rep.kind = to_string(CounterexampleKind::NonmonotoneDrift);
    rep.delta = ed.mean;
    rep.se = ed.se;
    rep.z = capped_z(ed.mean, ed.se);
    rep.attempts = 1;
    rep.demonstrated = ed.mean <= -0.999;
    rep.detail = "decreasing convex profile -z with drifts 0 <= 1 and equal unit diffusion; "
                 "shared noise cancels so the sampled difference " +
                 fmt(ed.mean) + " sits at the closed-form value -1";
    return rep;
}

// Convex multivariate test functions for the randomized hunt: a max of
// affine pieces plus a positive semidefinite quadratic.
struct MaxAffineQuad {
    std::vector<Vec> slopes;
    std::vector<double> offsets;
    Mat quad; // PSD

    double operator()(const Vec& y) const {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < slopes.size(); ++k)
            best = std::max(best, slopes[k].dot(y) + offsets[k]);
        return best + y.dot(quad * y);
    }
};

double unit_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return 2.0 * sde::uniform01(sde::counter_hash(seed, a, b, c)) - 1.0;
}

CounterexampleReport run_search(const SearchOptions& opt) {
    CounterexampleReport rep;
    rep.kind = to_string(CounterexampleKind::MultivariateSearch);
    rep.attempts = opt.attempts;
    double best_z = std::numeric_limits<double>::infinity();

    for (int a = 0; a < opt.attempts; ++a) {
        const std::uint64_t cseed = sde::mix64(opt.seed ^ (0xc0ffeeULL + a));
        const bool state_dependent = (a % 5) == 4;

        double delta = 0.0, se = 0.0;
        std::ostringstream desc;
        if (!state_dependent) {
            // Constant coefficients: exact terminal sampling, shared normals.
            const int d = 2;
            Mat sigma(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) sigma(i, j) = unit_draw(cseed, 1, i, j);
            Vec w(d);
            for (int i = 0; i < d; ++i) w[i] = unit_draw(cseed, 2, i, 0);
            const Mat gx = sigma * sigma.transpose();
            const Mat gy = gx + w * w.transpose(); // dominance holds by construction
            const Eigen::LLT<Mat> llt(gy + 1e-12 * Mat::Identity(d, d));
            const Mat rho = llt.matrixL();

            MaxAffineQuad g;
            for (int k = 0; k < 3; ++k) {
                Vec s(d);
                for (int i = 0; i < d; ++i) s[i] = unit_draw(cseed, 3 + k, i, 0);
                g.slopes.push_back(s);
                g.offsets.push_back(unit_draw(cseed, 3 + k, 7, 0));
            }
            Mat m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = unit_draw(cseed, 9, i, j);
            g.quad = 0.25 * m.transpose() * m;

            const double horizon = 0.5 + sde::uniform01(sde::counter_hash(cseed, 10, 0, 0));
            const double sqrt_t = std::sqrt(horizon);
            double sum = 0.0, sumsq = 0.0;
            Vec xi(d), x(d), y(d);
            for (std::int64_t p = 0; p < opt.paths; ++p) {
                sde::brownian_increment(cseed, p, 0, d, xi.data());
                x = sqrt_t * (sigma * xi);
                y = sqrt_t * (rho * xi);
                const double diff = g(y) - g(x);
                sum += diff;
                sumsq += diff * diff;
            }
            const double n = static_cast<double>(opt.paths);
            delta = sum / n;
            const double var = std::max(0.0, (sumsq - n * delta * delta) / (n - 1.0));
            se = std::sqrt(var / n);
            desc << "constant 2x2 candidate " << a << " (terminal sampling, horizon "
                 << fmt(horizon) << ")";
        } else {
            // State-dependent diagonal dispersion dominated by a constant one.
            const int d = 1 + static_cast<int>(sde::counter_hash(cseed, 0, 0, 1) % 2);
            std::vector<double> params;
            double top = 0.0;
            for (int i = 0; i < d * d; ++i) {
                const int row = i / d, col = i % d;
                if (row != col) {
                    // base 0, amp 0: off-diagonal entries vanish
                    params.insert(params.end(), {0.0, 0.0});
                    for (int k = 0; k < d; ++k) params.push_back(0.0);
                    params.push_back(0.0);
                    continue;
                }
                const double base = 0.6 + 0.4 * sde::uniform01(sde::counter_hash(cseed, 20, i, 0));
                const double amp = 0.3 * sde::uniform01(sde::counter_hash(cseed, 21, i, 0));
                params.insert(params.end(), {base, amp});
                for (int k = 0; k < d; ++k)
                    params.push_back(unit_draw(cseed, 22 + i, k, 0));
                params.push_back(unit_draw(cseed, 23, i, 0));
                top = std::max(top, base + amp);
            }
            auto sig_field = model::CoefficientField::from_params(
                model::FieldKind::TrigPerturbed, d, d, d, params);
            const Mat rho = (top + 0.1) * Mat::Identity(d, d);
            const Vec x0 = Vec::Zero(d);
            const DiffusionModel mx(d, x0,
                                    model::CoefficientField::constant(d, Mat::Zero(d, 1)),
                                    sig_field);
            const DiffusionModel my(d, x0,
                                    model::CoefficientField::constant(d, Mat::Zero(d, 1)),
                                    model::CoefficientField::constant(d, rho));
            Vec c(d);
            for (int i = 0; i < d; ++i)
                c[i] = 0.5 + sde::uniform01(sde::counter_hash(cseed, 30, i, 0));
            const bool use_abs = (sde::counter_hash(cseed, 31, 0, 0) & 1) != 0;
            PayoffSpec payoff(c,
                              ScalarFunction(use_abs ? convex::FunctionKind::Abs
                                                     : convex::FunctionKind::Softplus),
                              true, !use_abs, 4.0, 1.0);
            sde::SimPlan plan{1.0, 32, std::min<std::int64_t>(opt.paths, 20000), cseed};
            const sde::SimResult sim =
                sde::simulate_pair(mx, my, payoff, payoff, plan, opt.threads);
            const sde::MCEstimate ed = sde::estimate(sim, sde::Series::Diff);
            delta = ed.mean;
            se = ed.se;
            desc << "state-dependent diagonal candidate " << a << " in dimension " << d;
        }

        const double z = capped_z(delta, se);
        if (z < best_z) {
            best_z = z;
            rep.delta = delta;
            rep.se = se;
            rep.z = z;
            rep.detail = desc.str() + ": most adverse so far, difference " + fmt(delta) +
                         " (z = " + fmt(z) + ")";
        }
    }

    rep.found = best_z < -5.0;
    rep.demonstrated = rep.found;
    if (!rep.found)
        rep.detail = "no violation found in " + std::to_string(opt.attempts) +
                     " randomized candidates with dominance enforced by construction; most "
                     "adverse " +
                     rep.detail;
    return rep;
}

} // namespace

CounterexampleReport run_counterexample(CounterexampleKind kind, const SearchOptions& options) {
    switch (kind) {
    case CounterexampleKind::NonconvexPayoff: return run_nonconvex(options);
    case CounterexampleKind::NonmonotoneDrift: return run_nonmonotone(options);
    case CounterexampleKind::MultivariateSearch: return run_search(options);
    }
    throw SpecError("unknown counterexample kind");
}

} // namespace diffcomp::harness
