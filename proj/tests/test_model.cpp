#include <cmath>
#include <vector>

#include "doctest.h"

#include "diffcomp/errors.hpp"
#include "diffcomp/model.hpp"

using diffcomp::HypothesisViolation;
using namespace diffcomp::model;

namespace {

DiffusionModel driftless_1d(CoefficientField dispersion) {
    return DiffusionModel(1, Vec::Zero(1), CoefficientField::constant(1, Mat::Zero(1, 1)),
                          std::move(dispersion));
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("constant field evaluates to its matrix everywhere") {
    Mat values(2, 2);
    values << 1.0, 0.5, 0.25, 2.0;
    const CoefficientField field = CoefficientField::constant(2, values);

    Vec x(2);
    x << 3.7, -1.2;
    const Mat at_x = field.eval(x);
    CHECK(at_x == values);
    CHECK(field.eval(Vec::Zero(2)) == values);

    // Frobenius norm sqrt(1 + 0.25 + 0.0625 + 4)
    CHECK(field.bound() == doctest::Approx(2.304886114323222).epsilon(1e-12));
    CHECK(field.lipschitz() == 0.0);
    CHECK_FALSE(field.is_constant_zero());
    CHECK(CoefficientField::constant(2, Mat::Zero(2, 1)).is_constant_zero());
}

TEST_CASE("affine-clamped field interpolates and saturates") {
    // offset 0.5, slope 2, clamped to [0, 2]
    const CoefficientField field =
        CoefficientField::from_params(FieldKind::AffineClamped, 1, 1, 1, {0.5, 2.0, 0.0, 2.0});

    Vec x(1);
    x[0] = 0.0;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(0.5));
    x[0] = 0.25;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(1.0));
    x[0] = 1.0; // 0.5 + 2 = 2.5 saturates at the cap
    CHECK(field.eval(x)(0, 0) == doctest::Approx(2.0));
    x[0] = -1.0; // 0.5 - 2 = -1.5 saturates at the floor
    CHECK(field.eval(x)(0, 0) == doctest::Approx(0.0));

    CHECK(field.bound() >= 2.0);
    CHECK(field.lipschitz() >= 2.0);
}

TEST_CASE("trig-perturbed field matches the closed form") {
    // base 0.7, amplitude 0.2, frequency 1, phase 0.3
    const CoefficientField field =
        CoefficientField::from_params(FieldKind::TrigPerturbed, 1, 1, 1, {0.7, 0.2, 1.0, 0.3});

    Vec x(1);
    x[0] = 0.4;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(0.7 + 0.2 * std::sin(0.7)).epsilon(1e-15));
    CHECK(field.eval(x)(0, 0) == doctest::Approx(0.8288435374475382).epsilon(1e-15));

    CHECK(field.bound() >= 0.9 - 1e-12); // sup is base + amp
    CHECK(field.bound() <= 0.9 + 1e-12);
    CHECK(field.lipschitz() >= 0.2); // amp * |freq|
}

TEST_CASE("table-interpolated field is piecewise linear with constant tails") {
    // one entry, 3 table nodes on [-1, 1] along axis 0: values 1, 3, 2
    const CoefficientField field = CoefficientField::from_params(
        FieldKind::TableInterpolated, 1, 1, 1, {0.0, -1.0, 1.0, 3.0, 1.0, 3.0, 2.0});

    Vec x(1);
    x[0] = -1.0;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(1.0));
    x[0] = -0.5;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(2.0));
    x[0] = 0.0;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(3.0));
    x[0] = 0.5;
    CHECK(field.eval(x)(0, 0) == doctest::Approx(2.5));
    x[0] = 5.0; // constant extrapolation to the right
    CHECK(field.eval(x)(0, 0) == doctest::Approx(2.0));
    x[0] = -5.0; // and to the left
    CHECK(field.eval(x)(0, 0) == doctest::Approx(1.0));

    CHECK(field.bound() >= 3.0);
    CHECK(field.lipschitz() >= 2.0); // steepest segment slope (3 - 1) / 1
}

TEST_CASE("diffusion matrix is sigma sigma^T") {
    Mat sigma(2, 2);
    sigma << 1.0, 0.0, 0.3, 2.0;
    const DiffusionModel m(2, Vec::Zero(2), CoefficientField::constant(2, Mat::Zero(2, 1)),
                           CoefficientField::constant(2, sigma));
    const Mat a = m.diffusion_matrix(Vec::Zero(2));
    CHECK(a(0, 0) == doctest::Approx(1.0));
    CHECK(a(0, 1) == doctest::Approx(0.3));
    CHECK(a(1, 0) == doctest::Approx(0.3));
    CHECK(a(1, 1) == doctest::Approx(4.09));
    CHECK(m.constant_coefficients());
}

TEST_CASE("loewner order accepts dominance and rejects its reverse") {
    const Mat eye = Mat::Identity(2, 2);
    CHECK(loewner_leq(eye, 2.0 * eye));
    CHECK_FALSE(loewner_leq(2.0 * eye, eye));
    CHECK(loewner_leq(eye, eye)); // equality sits inside the tolerance

    // Dominant matrix with off-diagonal coupling: gap eigenvalues are
    // strictly positive (0.1368 and 0.7632).
    Mat coupled(2, 2);
    coupled << 1.36, 0.3, 0.3, 1.54;
    CHECK(loewner_leq(eye, coupled));

    // Same diagonal with off-diagonal 0.78: the gap has determinant
    // 0.36 * 0.54 - 0.78^2 < 0, so it is indefinite and the order fails
    // even though both diagonal gaps are positive.
    Mat indefinite(2, 2);
    indefinite << 1.36, 0.78, 0.78, 1.54;
    CHECK_FALSE(loewner_leq(eye, indefinite));
}

TEST_CASE("order scan certifies a dominated pair and flags a reversed one") {
    const CoefficientField trig =
        CoefficientField::from_params(FieldKind::TrigPerturbed, 1, 1, 1, {0.7, 0.2, 1.0, 0.3});
    const CoefficientField unit = CoefficientField::constant(1, Mat::Identity(1, 1));

    const DiffusionModel small = driftless_1d(trig);
    const DiffusionModel big = driftless_1d(unit);

    const OrderReport ok = order_scan(small, big, 6.0, 256, 42);
    CHECK(ok.diffusion_order_ok);
    CHECK(ok.drift_order_ok);
    // gap is at least 1 - 0.9^2 = 0.19 at every point
    CHECK(ok.worst_eigenvalue >= 0.19 - 1e-12);
    CHECK(ok.worst_drift_gap == 0.0);
    CHECK(ok.sample_points.size() >= 256);

    const OrderReport reversed = order_scan(big, small, 6.0, 256, 42);
    CHECK_FALSE(reversed.diffusion_order_ok);
    CHECK(reversed.worst_eigenvalue < -0.1);
}

TEST_CASE("order scan compares drifts componentwise") {
    const CoefficientField unit = CoefficientField::constant(1, Mat::Identity(1, 1));
    const DiffusionModel mu0(1, Vec::Zero(1), CoefficientField::constant(1, Mat::Zero(1, 1)),
                             unit);
    const DiffusionModel mu1(1, Vec::Zero(1), CoefficientField::constant(1, Mat::Ones(1, 1)),
                             unit);

    const OrderReport forward = order_scan(mu0, mu1, 4.0, 128, 7);
    CHECK(forward.drift_order_ok);
    CHECK(forward.worst_drift_gap == doctest::Approx(1.0));

    const OrderReport backward = order_scan(mu1, mu0, 4.0, 128, 7);
    CHECK_FALSE(backward.drift_order_ok);
    CHECK(backward.worst_drift_gap == doctest::Approx(-1.0));
}

TEST_CASE("ellipticity scan reports the sampled eigenvalue range") {
    const DiffusionModel m =
        driftless_1d(CoefficientField::constant(1, Mat::Constant(1, 1, 0.8)));
    const EllipticityReport rep = ellipticity_scan(m, 5.0, 200, 11);
    CHECK(rep.lambda_min == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(rep.lambda_max == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(rep.sample_count >= 200);
    CHECK_FALSE(rep.degenerate());

    const DiffusionModel flat =
        driftless_1d(CoefficientField::constant(1, Mat::Zero(1, 1)));
    CHECK(ellipticity_scan(flat, 5.0, 50, 11).degenerate());
}

TEST_CASE("lipschitz probe accepts the family constant and rejects an understated one") {
    const CoefficientField trig =
        CoefficientField::from_params(FieldKind::TrigPerturbed, 1, 1, 1, {0.7, 0.2, 1.0, 0.3});

    const double empirical = lipschitz_probe(trig, 4.0, 400, 99);
    CHECK(empirical > 0.0);
    CHECK(empirical <= trig.lipschitz() * (1.0 + 1e-9));

    const CoefficientField understated = trig.with_declared_lipschitz(0.01);
    CHECK_THROWS_AS(lipschitz_probe(understated, 4.0, 400, 99), HypothesisViolation);
}

TEST_CASE("ball sampler is deterministic and stays inside its radius") {
    BallSampler a(2, 3.0, 1234);
    BallSampler b(2, 3.0, 1234);
    for (int i = 0; i < 64; ++i) {
        const Vec pa = a.next();
        const Vec pb = b.next();
        CHECK(pa == pb);
        CHECK(pa.norm() <= 3.0 + 1e-12);
    }
}

} // TEST_SUITE("model")
