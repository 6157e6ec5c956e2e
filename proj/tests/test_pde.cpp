#include <cmath>

#include "doctest.h"

#include "diffcomp/errors.hpp"
#include "diffcomp/pde.hpp"

using diffcomp::NumericError;
using diffcomp::SpecError;
using namespace diffcomp::pde;
using diffcomp::model::CoefficientField;
using diffcomp::model::FieldKind;
using diffcomp::model::Mat;
using diffcomp::convex::FunctionKind;
using diffcomp::convex::PayoffSpec;
using diffcomp::convex::ScalarFunction;

namespace {

DiffusionModel scalar_model(double drift, double dispersion) {
    return DiffusionModel(1, Vec::Zero(1),
                          CoefficientField::constant(1, Mat::Constant(1, 1, drift)),
                          CoefficientField::constant(1, Mat::Constant(1, 1, dispersion)));
}

DiffusionModel planar_model(double dispersion) {
    return DiffusionModel(2, Vec::Zero(2), CoefficientField::constant(2, Mat::Zero(2, 1)),
                          CoefficientField::constant(2, dispersion * Mat::Identity(2, 2)));
}

PayoffSpec profile_1d(FunctionKind kind) {
    return PayoffSpec(Vec::Ones(1), ScalarFunction(kind), true, kind == FunctionKind::Relu, 2.0,
                      1.0);
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

TEST_SUITE("pde") {

TEST_CASE("terminal expectation of the absolute value matches the gaussian closed form") {
    // E |X_1| with X_1 ~ N(0, v) is sqrt(2 v / pi)
    const GridSpec fine{1, 8.0, 257, 0, 1.0};
    const ValueField u1 = solve_backward(scalar_model(0.0, 1.0), profile_1d(FunctionKind::Abs),
                                         fine, BoundaryPolicy::ExactGaussian);
    const ValueField u2 =
        solve_backward(scalar_model(0.0, std::sqrt(2.0)), profile_1d(FunctionKind::Abs), fine,
                       BoundaryPolicy::ExactGaussian);

    const double exact1 = 0.79788456080286541;
    const double exact2 = 1.1283791670955126; // sqrt(2) times the unit-variance value
    const double err1 = std::abs(probe_value(u1, vec1(0.0)) - exact1);
    const double err2 = std::abs(probe_value(u2, vec1(0.0)) - exact2);
    CHECK(err1 <= 5e-3);
    CHECK(err2 <= 5e-3);

    // the difference of the two solves is the comparison gap at the origin
    const DeltaField gap = delta_field(u1, u2);
    CHECK(gap.core_min > 0.0);

    // refining the grid shrinks the error
    const GridSpec coarse{1, 8.0, 65, 0, 1.0};
    const ValueField c1 = solve_backward(scalar_model(0.0, 1.0), profile_1d(FunctionKind::Abs),
                                         coarse, BoundaryPolicy::ExactGaussian);
    const double err_coarse = std::abs(probe_value(c1, vec1(0.0)) - exact1);
    CHECK(err1 < err_coarse);
}

TEST_CASE("drifted relu expectation matches the gaussian closed form") {
    // E relu(1 + N(0,1)) = phi(1) + Phi(1)
    const double exact = 0.24197072451914337 + 0.84134474606854293;
    const GridSpec grid{1, 8.0, 257, 0, 1.0};
    const ValueField u = solve_backward(scalar_model(1.0, 1.0), profile_1d(FunctionKind::Relu),
                                        grid, BoundaryPolicy::ExactGaussian);
    CHECK(std::abs(probe_value(u, vec1(0.0)) - exact) <= 5e-3);
}

TEST_CASE("quadratic payoffs are integrated exactly in space and time") {
    // f = (x1 + x2)^2: the march is exact, u(0, x) = f(x) + 2 T tr(A)
    Vec w(2);
    w << 1.0, 1.0;
    const PayoffSpec payoff(w, ScalarFunction(FunctionKind::Quadratic), true, false, 2.0, 1.0);
    const GridSpec grid{2, 6.0, 81, 0, 1.0};

    const ValueField ux =
        solve_backward(planar_model(1.0), payoff, grid, BoundaryPolicy::ExactGaussian);
    const ValueField uy = solve_backward(planar_model(std::sqrt(2.0)), payoff, grid,
                                         BoundaryPolicy::ExactGaussian);

    CHECK(probe_value(ux, vec2(0.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(probe_value(uy, vec2(0.0, 0.0)) == doctest::Approx(4.0).epsilon(1e-9));

    // the gap field is identically tr(A_y) - tr(A_x) = 2 on the whole grid
    const DeltaField gap = delta_field(ux, uy);
    CHECK(gap.core_min == doctest::Approx(2.0).epsilon(1e-9));

    // interpolation is exact at a node and second-order accurate off the nodes
    const int mid = (grid.nodes_per_axis - 1) / 2;
    CHECK(ux.node_coord(mid) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(probe_value(ux, vec2(ux.node_coord(mid), ux.node_coord(mid))) == ux.at(mid, mid));
    const double off = probe_value(ux, vec2(0.33, -0.17));
    CHECK(off == doctest::Approx(0.16 * 0.16 + 2.0).epsilon(0.03));
}

TEST_CASE("frozen boundary agrees with exact boundary on a generous box") {
    const GridSpec grid{1, 10.0, 201, 0, 1.0};
    const ValueField exact = solve_backward(scalar_model(0.0, 1.0),
                                            profile_1d(FunctionKind::Abs), grid,
                                            BoundaryPolicy::ExactGaussian);
    const ValueField frozen = solve_backward(scalar_model(0.0, 1.0),
                                             profile_1d(FunctionKind::Abs), grid,
                                             BoundaryPolicy::FrozenData);
    CHECK(std::abs(probe_value(exact, vec1(0.0)) - probe_value(frozen, vec1(0.0))) <= 1e-9);
}

TEST_CASE("state-dependent coefficients run under the frozen boundary policy") {
    const CoefficientField trig =
        CoefficientField::from_params(FieldKind::TrigPerturbed, 1, 1, 1, {0.7, 0.2, 1.0, 0.3});
    const DiffusionModel m(1, Vec::Zero(1), CoefficientField::constant(1, Mat::Zero(1, 1)),
                           trig);
    const GridSpec grid{1, 8.0, 161, 0, 1.0};

    CHECK_THROWS_AS(
        solve_backward(m, profile_1d(FunctionKind::Abs), grid, BoundaryPolicy::ExactGaussian),
        SpecError);

    const ValueField u =
        solve_backward(m, profile_1d(FunctionKind::Abs), grid, BoundaryPolicy::FrozenData);
    const double v = probe_value(u, vec1(0.0));
    // dispersion lives in [0.5, 0.9], so the value sits between the two
    // constant-dispersion envelopes sqrt(2/pi) * 0.5 and sqrt(2/pi) * 0.9
    CHECK(v > 0.5 * 0.79788456080286541 - 5e-3);
    CHECK(v < 0.9 * 0.79788456080286541 + 5e-3);
}

TEST_CASE("threaded and serial marches agree bitwise") {
    // large enough that the solver switches to the threaded march
    const GridSpec grid{2, 4.0, 201, 0, 1.0};
    Vec w(2);
    w << 1.0, 1.0;
    const PayoffSpec payoff(w, ScalarFunction(FunctionKind::Abs), true, false, 2.0, 1.0);
    const DiffusionModel m = planar_model(std::sqrt(2.0));

    const ValueField serial = solve_backward(m, payoff, grid, BoundaryPolicy::ExactGaussian, 1);
    const ValueField threaded =
        solve_backward(m, payoff, grid, BoundaryPolicy::ExactGaussian, 4);

    REQUIRE(serial.values.size() == threaded.values.size());
    CHECK(serial.steps_taken == threaded.steps_taken);
    CHECK(static_cast<double>(serial.values.size()) * serial.steps_taken > 5e7);
    for (std::size_t i = 0; i < serial.values.size(); ++i)
        CHECK(serial.values[i] == threaded.values[i]);
}

TEST_CASE("convexity propagates backward from convex data") {
    const GridSpec grid{1, 8.0, 257, 0, 1.0};
    const ValueField u = solve_backward(scalar_model(0.0, std::sqrt(2.0)),
                                        profile_1d(FunctionKind::Abs), grid,
                                        BoundaryPolicy::ExactGaussian);
    const PropagationReport rep = propagation_report(u);
    CHECK(rep.dim == 1);
    CHECK(rep.core_radius == doctest::Approx(4.0));
    CHECK(rep.min_second_diff >= -1e-8);
    CHECK(rep.min_trace >= -1e-8);
    CHECK(rep.min_hessian_eig == rep.min_second_diff);
}

TEST_CASE("monotonicity propagates backward from nondecreasing data") {
    const GridSpec grid{1, 4.0, 129, 0, 1.0};
    const ValueField u = solve_backward(scalar_model(0.3, 1.0), profile_1d(FunctionKind::Relu),
                                        grid, BoundaryPolicy::ExactGaussian);
    const PropagationReport rep = propagation_report(u);
    CHECK(rep.min_gradient >= -1e-8);
    CHECK(rep.min_second_diff >= -1e-8);
}

TEST_CASE("grid and argument validation") {
    const PayoffSpec abs1 = profile_1d(FunctionKind::Abs);

    CHECK_THROWS_AS(solve_backward(scalar_model(0.0, 1.0), abs1, GridSpec{3, 4.0, 9, 0, 1.0},
                                   BoundaryPolicy::FrozenData),
                    SpecError);
    CHECK_THROWS_AS(solve_backward(scalar_model(0.0, 1.0), abs1, GridSpec{1, 4.0, 3, 0, 1.0},
                                   BoundaryPolicy::FrozenData),
                    SpecError);
    CHECK_THROWS_AS(solve_backward(planar_model(1.0), abs1, GridSpec{2, 4.0, 65, 0, 1.0},
                                   BoundaryPolicy::FrozenData),
                    SpecError); // payoff dimension mismatch

    // a diffusion that vanishes identically cannot be marched
    CHECK_THROWS_AS(solve_backward(scalar_model(0.0, 0.0), abs1, GridSpec{1, 4.0, 65, 0, 1.0},
                                   BoundaryPolicy::FrozenData),
                    NumericError);

    // two-dimensional quadrature boundaries exist only for closed-form families
    Vec w(2);
    w << 1.0, 1.0;
    const PayoffSpec soft2(w, ScalarFunction(FunctionKind::Softplus), true, true, 2.0, 1.0);
    CHECK_THROWS_AS(solve_backward(planar_model(1.0), soft2, GridSpec{2, 4.0, 65, 0, 1.0},
                                   BoundaryPolicy::ExactGaussian),
                    SpecError);

    const ValueField u = solve_backward(scalar_model(0.0, 1.0), abs1,
                                        GridSpec{1, 4.0, 65, 0, 1.0},
                                        BoundaryPolicy::ExactGaussian);
    CHECK_THROWS_AS(probe_value(u, vec1(4.5)), SpecError);
    CHECK_THROWS_AS(probe_value(u, vec2(0.0, 0.0)), SpecError);

    const ValueField other = solve_backward(scalar_model(0.0, 1.0), abs1,
                                            GridSpec{1, 4.0, 129, 0, 1.0},
                                            BoundaryPolicy::ExactGaussian);
    CHECK_THROWS_AS(delta_field(u, other), SpecError);
}

} // TEST_SUITE("pde")
