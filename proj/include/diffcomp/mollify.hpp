#pragma once

#include <vector>

#include "diffcomp/scalar_function.hpp"

namespace diffcomp::convex {

// A compactly supported C^2 replacement for a convex profile f:
//
//   f_eps_R(z) = W(z) * [ S(z) + gamma * (cosh(alpha z) - 1) ]
//
// where S is the Gaussian smoothing of f at width h (exact closed forms per
// family, see CoreKind), the cosh term adds strictly positive curvature, and
// W is a C^2 taper that is identically 1 on [-radius, radius] and identically
// 0 outside radius + taper_band. Inside the radius the construction stays
// within epsilon of f and has strictly positive second derivative; all three
// derivatives vanish exactly outside the support.
struct MollifiedFunction {
    enum class CoreKind {
        PwlConvolution,       // a0 + b0 z + sum_j jump_j * psi_h(z - knot_j)
        QuadraticConvolution, // q * (z^2 + h^2)
        ExpConvolution,       // A * exp(B z + B^2 h^2 / 2)
        Identity,             // already C^2: softplus, |z|^p with p >= 2
    };

    ScalarFunction base;
    double epsilon = 0.0;
    double radius = 0.0;
    double smoothing_width = 0.0; // h
    double bump_weight = 0.0;     // gamma
    double bump_rate = 0.0;       // alpha
    double taper_band = 1.0;

    CoreKind core = CoreKind::Identity;
    double pwl_a0 = 0.0, pwl_b0 = 0.0;
    std::vector<double> knots, jumps;
    double quad_q = 0.0;
    double exp_a = 0.0, exp_b = 0.0;

    double value(double z) const;
    double d1(double z) const;
    double d2(double z) const;

    // Smoothed profile before bump and taper; Gaussian smoothing preserves
    // pointwise ordering, which the ordering property test relies on.
    double core_convolution(double z) const;

    double support_radius() const { return radius + taper_band; }
};

// Builds the smoothed profile, tuning h by halving until the sup-distance to
// f on [-radius, radius] (checked on a dense grid) is within epsilon; gamma
// is sized so the bump consumes at most half the budget. Preconditions: f
// convex on [-radius - 2, radius + 2] (checked numerically), epsilon > 0.
MollifiedFunction mollify(const ScalarFunction& f, double epsilon, double radius);

// Same construction with pinned tuning parameters (no search); used by tests
// that need two profiles smoothed identically.
MollifiedFunction mollify_with(const ScalarFunction& f, double epsilon, double radius, double h,
                               double gamma);

// Analytic second derivative of the constructed representation.
double second_derivative(const MollifiedFunction& m, double z);

} // namespace diffcomp::convex
