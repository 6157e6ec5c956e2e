#include <cmath>

#include "doctest.h"

#include "diffcomp/errors.hpp"
#include "diffcomp/kernels.hpp"
#include "diffcomp/mollify.hpp"

using diffcomp::SpecError;
using namespace diffcomp::kernels;
using diffcomp::convex::FunctionKind;
using diffcomp::convex::MollifiedFunction;
using diffcomp::convex::ScalarFunction;
using diffcomp::convex::mollify;

namespace {

ConstKernel heat_1d() {
    return ConstKernel(Mat::Constant(1, 1, 0.5), Vec::Zero(1));
}

Vec vec1(double v) {
    Vec x(1);
    x[0] = v;
    return x;
}

Vec vec2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("heat kernel matches the standard normal density") {
    const ConstKernel k = heat_1d(); // A = 1/2 so the unit-time variance is 1
    const KernelEval at0 = k.eval(0.0, vec1(0.0), 1.0, vec1(0.0));
    CHECK(at0.value == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(at0.grad[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    // d^2/dx^2 phi(y - x) = phi(u) (u^2 - 1) = -phi(0) at u = 0
    CHECK(at0.hess(0, 0) == doctest::Approx(-0.3989422804014327).epsilon(1e-14));

    const KernelEval at1 = k.eval(0.0, vec1(0.0), 1.0, vec1(1.0));
    CHECK(at1.value == doctest::Approx(0.24197072451914337).epsilon(1e-14));
    CHECK(at1.grad[0] == doctest::Approx(0.24197072451914337).epsilon(1e-14));
    CHECK(at1.hess(0, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("two-dimensional kernel value and drift shift") {
    // A = I/2 over a gap of 0.5: covariance I/2, density e^{-|u|^2}/pi at u
    const ConstKernel k(0.5 * Mat::Identity(2, 2), Vec::Zero(2));
    const KernelEval center = k.eval(0.0, vec2(0.0, 0.0), 0.5, vec2(0.0, 0.0));
    CHECK(center.value == doctest::Approx(1.0 / M_PI).epsilon(1e-14));

    const KernelEval off = k.eval(0.0, vec2(0.0, 0.0), 0.5, vec2(0.3, -0.4));
    CHECK(off.value == doctest::Approx(std::exp(-0.25) / M_PI).epsilon(1e-13));

    // adding drift b translates the mean by b dt without changing the shape
    const ConstKernel kd(0.5 * Mat::Identity(2, 2), vec2(0.2, -0.1));
    const KernelEval shifted = kd.eval(0.0, vec2(0.0, 0.0), 0.5, vec2(0.4, -0.45));
    CHECK(shifted.value == doctest::Approx(off.value).epsilon(1e-13));
}

TEST_CASE("kernel construction rejects malformed coefficient matrices") {
    Mat asym(2, 2);
    asym << 0.5, 0.2, -0.2, 0.5;
    CHECK_THROWS_AS(ConstKernel(asym, Vec::Zero(2)), SpecError);

    Mat indefinite(2, 2);
    indefinite << 0.5, 1.0, 1.0, 0.5;
    CHECK_THROWS_AS(ConstKernel(indefinite, Vec::Zero(2)), SpecError);

    CHECK_THROWS_AS(ConstKernel(Mat::Identity(2, 2), Vec::Zero(1)), SpecError);
    CHECK_THROWS_AS(heat_1d().eval(1.0, vec1(0.0), 1.0, vec1(0.0)), SpecError);
}

TEST_CASE("adjoint pairing: equal values, negated gradients, equal hessians") {
    Mat a(2, 2);
    a << 0.5, 0.1, 0.1, 0.4;
    const ConstKernel k(a, vec2(0.3, -0.2));
    const ConstKernel adj = k.adjoint();

    const Vec x = vec2(0.4, -0.2);
    const Vec y = vec2(-0.3, 0.5);
    const KernelEval fwd = k.eval(0.1, x, 0.8, y);
    const KernelEval rev = adj.eval(0.1, y, 0.8, x);

    CHECK(fwd.value == doctest::Approx(rev.value).epsilon(1e-13));
    for (int i = 0; i < 2; ++i)
        CHECK(fwd.grad[i] == doctest::Approx(-rev.grad[i]).epsilon(1e-12).scale(fwd.value));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(fwd.hess(i, j) ==
                  doctest::Approx(rev.hess(i, j)).epsilon(1e-12).scale(fwd.value));
}

TEST_CASE("duality residuals sit at rounding level across drifts and dimensions") {
    const DualityReport r1 =
        duality_check(ConstKernel(Mat::Constant(1, 1, 0.7), vec1(0.4)), 0.0, vec1(0.3), 0.9,
                      vec1(-0.6));
    CHECK(r1.ok);
    CHECK(r1.max_residual <= 1e-12);

    Mat a(2, 2);
    a << 0.6, -0.15, -0.15, 0.35;
    const DualityReport r2 =
        duality_check(ConstKernel(a, vec2(-0.2, 0.5)), 0.2, vec2(1.0, -0.7), 1.1,
                      vec2(-0.4, 0.9));
    CHECK(r2.ok);
    CHECK(r2.max_residual <= 1e-12);
}

TEST_CASE("kernel integrates to one and composes over intermediate times") {
    const double norm = normalization_residual(heat_1d(), 0.5, vec1(0.3), 4096);
    CHECK(std::abs(norm) <= 1e-8);

    Mat a(2, 2);
    a << 0.5, 0.1, 0.1, 0.4;
    const double norm2 = normalization_residual(ConstKernel(a, vec2(0.1, -0.05)), 0.4,
                                                vec2(0.2, 0.1), 512);
    CHECK(std::abs(norm2) <= 1e-8);

    const double comp =
        composition_residual(heat_1d(), 0.3, 0.45, vec1(0.0), vec1(0.7), 2048);
    CHECK(std::abs(comp) <= 1e-6);
}

TEST_CASE("gaussian tail bound holds at the safe exponent and fails at a sharp one") {
    const ConstKernel k = heat_1d(); // density exponent is 1/(2 dt)
    const GaussianBoundReport pass =
        gaussian_bound_check(k, BoundParams{1.0, 0.25}, 0.01, 2.0, 4.0, 17);
    CHECK(pass.ok);
    CHECK(pass.worst_ratio < 1.0);

    const GaussianBoundReport fail =
        gaussian_bound_check(k, BoundParams{1.0, 1.0}, 0.01, 2.0, 4.0, 17);
    CHECK_FALSE(fail.ok);
    CHECK(fail.worst_ratio > 1.0);
    CHECK(fail.witness_offset.size() == 1);
    CHECK(fail.witness_offset.norm() > 0.0);
    CHECK(fail.witness_dt > 0.0);
}

TEST_CASE("second derivatives transfer from kernel to payoff profile") {
    const MollifiedFunction smooth = mollify(ScalarFunction(FunctionKind::Abs), 0.01, 6.0);
    const ConstKernel k(Mat::Constant(1, 1, 0.6), vec1(0.2));
    const HessianTransferReport rep =
        hessian_transfer_check(k, smooth, Vec::Ones(1), 0.0, vec1(0.3), 0.75, 2048, 1e-5);
    CHECK(rep.ok);
    CHECK(rep.max_abs_diff <= 1e-5 * std::max(1.0, rep.scale));
    // both sides are positive: convex payoff against a positive kernel
    CHECK(rep.lhs(0, 0) > 0.0);
    CHECK(rep.rhs(0, 0) > 0.0);
}

} // TEST_SUITE("kernels")
