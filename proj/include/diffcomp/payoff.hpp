#pragma once

#include <Eigen/Dense>

#include "diffcomp/scalar_function.hpp"

namespace diffcomp::convex {

using Vec = Eigen::VectorXd;

inline constexpr double kConvexityTol = 1e-10;

// A payoff y -> f(<weights, y>) together with the properties the caller
// claims for f. The claims are verified numerically before a comparison run;
// the theorems certify nothing when a claim fails.
struct PayoffSpec {
    Vec weights; // strictly positive
    ScalarFunction f;
    bool declared_convex = false;
    bool declared_nondecreasing = false;
    double growth_a = 0.0; // |f(z)| <= growth_a * exp(growth_b * |z|)
    double growth_b = 0.0;

    PayoffSpec() = default;
    PayoffSpec(Vec weights, ScalarFunction f, bool convex, bool nondecreasing, double growth_a,
               double growth_b);
};

double eval_payoff(const PayoffSpec& p, const Vec& y);

struct CheckResult {
    bool ok = false;
    double worst = 0.0;   // most negative probed quantity
    double witness_z = 0.0;
};

// Midpoint second differences over a sample grid and a ladder of step sizes
// must stay above -kConvexityTol.
CheckResult convexity_check(const ScalarFunction& f, double lo, double hi, int samples);

// First differences over a sample grid and a ladder of step sizes.
CheckResult monotonicity_check(const ScalarFunction& f, double lo, double hi, int samples);

// |f(z)| <= a * exp(b |z|) over a sample grid in [-radius, radius].
CheckResult growth_check(const ScalarFunction& f, double a, double b, double radius, int samples);

} // namespace diffcomp::convex
