#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

#include "diffcomp/errors.hpp"
#include "diffcomp/rng.hpp"
#include "diffcomp/sim.hpp"

using diffcomp::NumericError;
using diffcomp::SpecError;
using namespace diffcomp::sde;
using diffcomp::model::CoefficientField;
using diffcomp::model::Mat;
using diffcomp::model::Vec;
using diffcomp::convex::FunctionKind;
using diffcomp::convex::PayoffSpec;
using diffcomp::convex::ScalarFunction;

namespace {

DiffusionModel scalar_model(double drift, double dispersion) {
    return DiffusionModel(1, Vec::Zero(1),
                          CoefficientField::constant(1, Mat::Constant(1, 1, drift)),
                          CoefficientField::constant(1, Mat::Constant(1, 1, dispersion)));
}

PayoffSpec abs_payoff() {
    return PayoffSpec(Vec::Ones(1), ScalarFunction(FunctionKind::Abs), true, false, 2.0, 1.0);
}

std::string temp_path(const char* stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

} // namespace

TEST_SUITE("sde") {

TEST_CASE("counter rng is a pure function of its keys") {
    const double a = normal_draw(42, 7, 3, 1);
    CHECK(normal_draw(42, 7, 3, 1) == a);
    CHECK(normal_draw(42, 7, 3, 2) != a);
    CHECK(normal_draw(42, 8, 3, 1) != a);
    CHECK(normal_draw(43, 7, 3, 1) != a);

    for (std::uint64_t h : {0ULL, 1ULL, 0xffffffffffffffffULL, 0x123456789abcdefULL}) {
        const double u = uniform01(h);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("inverse normal cdf hits tabulated quantiles") {
    CHECK(std::abs(inverse_normal_cdf(0.5)) <= 1e-15);
    // Phi(1) = 0.84134474606854293
    CHECK(inverse_normal_cdf(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inverse_normal_cdf(1.0 - 0.84134474606854293) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    // deep tail stays finite and monotone
    CHECK(inverse_normal_cdf(1e-12) < -6.0);
    CHECK(inverse_normal_cdf(1.0 - 1e-12) > 6.0);
}

TEST_CASE("sample moments match the standard normal within clt bounds") {
    const std::int64_t n = 200000;
    long double m1 = 0.0L, m2 = 0.0L;
    for (std::int64_t i = 0; i < n; ++i) {
        const long double x = normal_draw(777, static_cast<std::uint64_t>(i), 0, 0);
        m1 += x;
        m2 += x * x;
    }
    const double rn = std::sqrt(static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(m1) / n) <= 4.0 / rn);
    CHECK(std::abs(static_cast<double>(m2) / n - 1.0) <= 4.0 * std::sqrt(2.0) / rn);
}

TEST_CASE("estimate reduces samples and skips flagged paths") {
    SimResult r;
    r.samples = {{0.0, 5.0}, {2.0, 1.0}, {100.0, 100.0}};
    r.flags = {0, 0, 1};
    r.flagged = 1;

    const MCEstimate ex = estimate(r, Series::PayoffX);
    CHECK(ex.mean == doctest::Approx(1.0));
    CHECK(ex.se == doctest::Approx(1.0)); // sd of {0, 2} is sqrt(2), se = sqrt(2)/sqrt(2)
    CHECK(ex.count == 2);

    const MCEstimate ed = estimate(r, Series::Diff);
    CHECK(ed.mean == doctest::Approx(2.0)); // mean of {5 - 0, 1 - 2}
    CHECK(ed.count == 2);

    SimResult all_bad;
    all_bad.samples = {{1.0, 1.0}};
    all_bad.flags = {1};
    all_bad.flagged = 1;
    CHECK_THROWS_AS(estimate(all_bad, Series::Diff), NumericError);
}

TEST_CASE("terminal means of coupled brownian models match closed forms") {
    // driftless, constant dispersions 1 and 2: E |X_T| = sigma sqrt(2/pi)
    const SimPlan plan{1.0, 8, 40000, 2024};
    const SimResult sim =
        simulate_pair(scalar_model(0.0, 1.0), scalar_model(0.0, 2.0), abs_payoff(),
                      abs_payoff(), plan, 0);
    CHECK(sim.flagged == 0);

    const MCEstimate ex = estimate(sim, Series::PayoffX);
    const MCEstimate ey = estimate(sim, Series::PayoffY);
    CHECK(std::abs(ex.mean - 0.79788456080286541) <= 4.0 * ex.se);
    CHECK(std::abs(ey.mean - 1.5957691216057308) <= 4.0 * ey.se);

    // shared increments keep the coupled difference tight: var(|2W| - |W|)
    // is var(|W|) = 1 - 2/pi, far below var(|2W|) + var(|W|)
    const MCEstimate ed = estimate(sim, Series::Diff);
    CHECK(ed.mean > 0.0);
    CHECK(ed.se < ey.se + ex.se);
}

TEST_CASE("identical models produce bitwise identical payoff pairs") {
    const SimPlan plan{1.0, 16, 5000, 99};
    const DiffusionModel m = scalar_model(0.1, 0.8);
    const SimResult sim = simulate_pair(m, m, abs_payoff(), abs_payoff(), plan, 0);
    for (const PairedSample& s : sim.samples) CHECK(s.payoff_x == s.payoff_y);

    const MCEstimate ed = estimate(sim, Series::Diff);
    CHECK(ed.mean == 0.0);
    CHECK(ed.se == 0.0);
}

TEST_CASE("results do not depend on the thread count") {
    const SimPlan plan{1.0, 16, 20000, 555};
    const DiffusionModel mx = scalar_model(0.0, 1.0);
    const DiffusionModel my = scalar_model(0.3, 1.3);
    const SimResult one = simulate_pair(mx, my, abs_payoff(), abs_payoff(), plan, 1);
    const SimResult four = simulate_pair(mx, my, abs_payoff(), abs_payoff(), plan, 4);

    REQUIRE(one.samples.size() == four.samples.size());
    for (std::size_t p = 0; p < one.samples.size(); ++p) {
        CHECK(one.samples[p].payoff_x == four.samples[p].payoff_x);
        CHECK(one.samples[p].payoff_y == four.samples[p].payoff_y);
    }
    CHECK(estimate(one, Series::Diff).mean == estimate(four, Series::Diff).mean);
    CHECK(estimate(one, Series::Diff).se == estimate(four, Series::Diff).se);
}

TEST_CASE("overflowing payoffs flag paths and trip the failure budget") {
    // |X| ~ 1e200 makes e^z overflow on essentially every path
    const PayoffSpec explode(Vec::Ones(1), ScalarFunction(FunctionKind::ExpScaled, {1.0, 1.0}),
                             true, true, 1.0, 1.0);
    const SimPlan plan{1.0, 2, 50, 7};
    CHECK_THROWS_AS(simulate_pair(scalar_model(0.0, 1e200), scalar_model(0.0, 1e200), explode,
                                  explode, plan, 0),
                    NumericError);
}

TEST_CASE("euler is exact for arithmetic brownian motion") {
    const ProbeModel abm{ProbeKind::ArithmeticBM, 0.3, 0.6, 0.5, 1.0};
    const ProbeResult r = strong_error_probe(abm, {16, 64}, 4000, 4444);
    CHECK(r.max_strong_error <= 1e-12);
}

TEST_CASE("euler converges at strong order one-half on geometric brownian motion") {
    const ProbeModel gbm{ProbeKind::GeometricBM, 0.05, 0.5, 1.0, 1.0};
    const ProbeResult r = strong_error_probe(gbm, {16, 32, 64, 128}, 8000, 3333);
    REQUIRE(r.points.size() == 4);
    // errors shrink monotonically along the ladder
    for (std::size_t i = 1; i < r.points.size(); ++i)
        CHECK(r.points[i].strong_error < r.points[i - 1].strong_error);
    CHECK(r.strong_slope >= 0.3);
    CHECK(r.strong_slope <= 0.7);
}

TEST_CASE("sample files round-trip bitwise") {
    const SimPlan plan{1.0, 8, 500, 31};
    const SimResult sim = simulate_pair(scalar_model(0.0, 1.0), scalar_model(0.0, 1.4),
                                        abs_payoff(), abs_payoff(), plan, 0);
    const std::string path = temp_path("diffcomp_sde_roundtrip.bin");
    write_samples(path, sim);
    const SimResult back = read_samples(path);
    std::remove(path.c_str());

    REQUIRE(back.samples.size() == sim.samples.size());
    for (std::size_t p = 0; p < sim.samples.size(); ++p) {
        CHECK(back.samples[p].payoff_x == sim.samples[p].payoff_x);
        CHECK(back.samples[p].payoff_y == sim.samples[p].payoff_y);
    }

    const std::string junk = temp_path("diffcomp_sde_junk.bin");
    std::FILE* f = std::fopen(junk.c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("not a sample dump", f);
    std::fclose(f);
    CHECK_THROWS_AS(read_samples(junk), SpecError);
    std::remove(junk.c_str());
}

} // TEST_SUITE("sde")
