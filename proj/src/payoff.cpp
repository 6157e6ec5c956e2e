#include "diffcomp/payoff.hpp"

#include <cmath>

#include "diffcomp/errors.hpp"

namespace diffcomp::convex {

PayoffSpec::PayoffSpec(Vec weights_, ScalarFunction f_, bool convex, bool nondecreasing,
                       double growth_a_, double growth_b_)
    : weights(std::move(weights_)), f(std::move(f_)), declared_convex(convex),
      declared_nondecreasing(nondecreasing), growth_a(growth_a_), growth_b(growth_b_) {
    if (weights.size() == 0) throw SpecError("payoff needs at least one weight");
    for (int i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0)) throw SpecError("payoff weights must be strictly positive");
    if (growth_a < 0.0 || growth_b < 0.0)
        throw SpecError("growth envelope constants must be nonnegative");
}

double eval_payoff(const PayoffSpec& p, const Vec& y) {
    if (y.size() != p.weights.size())
        throw SpecError("payoff evaluated at a point of wrong dimension");
    return p.f(p.weights.dot(y));
}

CheckResult convexity_check(const ScalarFunction& f, double lo, double hi, int samples) {
    if (!(lo < hi) || samples < 8) throw SpecError("convexity_check needs lo < hi, samples >= 8");
    const double base_h = (hi - lo) / (samples - 1);
    CheckResult res;
    res.worst = 0.0;
    for (int ladder = 0; ladder < 4; ++ladder) {
        const double h = base_h * (1 << ladder);
        for (int i = 0; i < samples; ++i) {
            const double z = lo + (hi - lo) * i / (samples - 1);
            const double d2 = f(z - h) - 2.0 * f(z) + f(z + h);
            if (d2 < res.worst) {
                res.worst = d2;
                res.witness_z = z;
            }
        }
    }
    res.ok = res.worst >= -kConvexityTol;
    return res;
}

CheckResult monotonicity_check(const ScalarFunction& f, double lo, double hi, int samples) {
    if (!(lo < hi) || samples < 8)
        throw SpecError("monotonicity_check needs lo < hi, samples >= 8");
    const double base_h = (hi - lo) / (samples - 1);
    CheckResult res;
    res.worst = 0.0;
    for (int ladder = 0; ladder < 4; ++ladder) {
        const double h = base_h * (1 << ladder);
        for (int i = 0; i < samples; ++i) {
            const double z = lo + (hi - lo) * i / (samples - 1);
            const double d1 = f(z + h) - f(z);
            if (d1 < res.worst) {
                res.worst = d1;
                res.witness_z = z;
            }
        }
    }
    res.ok = res.worst >= -kConvexityTol;
    return res;
}

CheckResult growth_check(const ScalarFunction& f, double a, double b, double radius, int samples) {
    if (!(radius > 0.0) || samples < 8)
        throw SpecError("growth_check needs radius > 0, samples >= 8");
    CheckResult res;
    res.worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double z = -radius + 2.0 * radius * i / (samples - 1);
        const double margin = a * std::exp(b * std::abs(z)) - std::abs(f(z));
        if (margin < res.worst) {
            res.worst = margin;
            res.witness_z = z;
        }
    }
    res.ok = res.worst >= 0.0;
    return res;
}

} // namespace diffcomp::convex
