#include "diffcomp/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diffcomp/errors.hpp"
#include "diffcomp/gauss.hpp"
#include "diffcomp/payoff.hpp"

namespace diffcomp::convex {

namespace {

// Gaussian smoothing of the positive part: (.)_+ * phi_h, with derivatives.
// psi(x)  = x Phi(x/h) + h phi(x/h)
// psi'(x) = Phi(x/h)
// psi''(x)= phi(x/h) / h
double psi(double x, double h) { return x * norm_cdf(x / h) + h * norm_pdf(x / h); }
double psi_d1(double x, double h) { return norm_cdf(x / h); }
double psi_d2(double x, double h) { return norm_pdf(x / h) / h; }

// C^2 taper profile: s(0)=0, s(1)=1, s' = s'' = 0 at both ends.
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smoothstep_d2(double t) { return 60.0 * t * (1.0 - 3.0 * t + 2.0 * t * t); }

struct Window {
    double w, d1, d2;
};

Window window_at(double z, double radius, double band) {
    const double a = std::abs(z);
    if (a <= radius) return {1.0, 0.0, 0.0};
    if (a >= radius + band) return {0.0, 0.0, 0.0};
    const double t = (a - radius) / band;
    const double sgn = z >= 0.0 ? 1.0 : -1.0;
    return {1.0 - smoothstep(t), -sgn * smoothstep_d1(t) / band, -smoothstep_d2(t) / (band * band)};
}

} // namespace

double MollifiedFunction::core_convolution(double z) const {
    const double h = smoothing_width;
    switch (core) {
    case CoreKind::PwlConvolution: {
        double v = pwl_a0 + pwl_b0 * z;
        if (h > 0.0) {
            for (size_t j = 0; j < knots.size(); ++j) v += jumps[j] * psi(z - knots[j], h);
        } else {
            for (size_t j = 0; j < knots.size(); ++j)
                v += jumps[j] * std::max(z - knots[j], 0.0);
        }
        return v;
    }
    case CoreKind::QuadraticConvolution: return quad_q * (z * z + h * h);
    case CoreKind::ExpConvolution: return exp_a * std::exp(exp_b * z + 0.5 * exp_b * exp_b * h * h);
    case CoreKind::Identity: return base(z);
    }
    throw SpecError("unreachable core kind");
}

namespace {

double core_d1(const MollifiedFunction& m, double z) {
    const double h = m.smoothing_width;
    switch (m.core) {
    case MollifiedFunction::CoreKind::PwlConvolution: {
        double v = m.pwl_b0;
        if (h > 0.0) {
            for (size_t j = 0; j < m.knots.size(); ++j) v += m.jumps[j] * psi_d1(z - m.knots[j], h);
        } else {
            for (size_t j = 0; j < m.knots.size(); ++j)
                v += z > m.knots[j] ? m.jumps[j] : 0.0;
        }
        return v;
    }
    case MollifiedFunction::CoreKind::QuadraticConvolution: return 2.0 * m.quad_q * z;
    case MollifiedFunction::CoreKind::ExpConvolution:
        return m.exp_b * m.core_convolution(z);
    case MollifiedFunction::CoreKind::Identity: {
        switch (m.base.kind()) {
        case FunctionKind::Softplus: {
            const double s = z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            return s;
        }
        case FunctionKind::Power: {
            const double p = m.base.params()[0];
            const double sgn = z >= 0.0 ? 1.0 : -1.0;
            return p * sgn * std::pow(std::abs(z), p - 1.0);
        }
        default: throw SpecError("identity core has no analytic derivative for this kind");
        }
    }
    }
    throw SpecError("unreachable core kind");
}

double core_d2(const MollifiedFunction& m, double z) {
    const double h = m.smoothing_width;
    switch (m.core) {
    case MollifiedFunction::CoreKind::PwlConvolution: {
        double v = 0.0;
        if (h > 0.0)
            for (size_t j = 0; j < m.knots.size(); ++j) v += m.jumps[j] * psi_d2(z - m.knots[j], h);
        return v;
    }
    case MollifiedFunction::CoreKind::QuadraticConvolution: return 2.0 * m.quad_q;
    case MollifiedFunction::CoreKind::ExpConvolution:
        return m.exp_b * m.exp_b * m.core_convolution(z);
    case MollifiedFunction::CoreKind::Identity: {
        switch (m.base.kind()) {
        case FunctionKind::Softplus: {
            const double s = z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            return s * (1.0 - s);
        }
        case FunctionKind::Power: {
            const double p = m.base.params()[0];
            return p * (p - 1.0) * std::pow(std::abs(z), p - 2.0);
        }
        default: throw SpecError("identity core has no analytic derivative for this kind");
        }
    }
    }
    throw SpecError("unreachable core kind");
}

} // namespace

double MollifiedFunction::value(double z) const {
    if (std::abs(z) >= radius + taper_band) return 0.0;
    const Window w = window_at(z, radius, taper_band);
    const double g = core_convolution(z) + bump_weight * (std::cosh(bump_rate * z) - 1.0);
    return w.w * g;
}

double MollifiedFunction::d1(double z) const {
    if (std::abs(z) >= radius + taper_band) return 0.0;
    const Window w = window_at(z, radius, taper_band);
    const double g = core_convolution(z) + bump_weight * (std::cosh(bump_rate * z) - 1.0);
    const double g1 = core_d1(*this, z) + bump_weight * bump_rate * std::sinh(bump_rate * z);
    return w.d1 * g + w.w * g1;
}

double MollifiedFunction::d2(double z) const {
    if (std::abs(z) >= radius + taper_band) return 0.0;
    const Window w = window_at(z, radius, taper_band);
    const double g = core_convolution(z) + bump_weight * (std::cosh(bump_rate * z) - 1.0);
    const double g1 = core_d1(*this, z) + bump_weight * bump_rate * std::sinh(bump_rate * z);
    const double g2 =
        core_d2(*this, z) + bump_weight * bump_rate * bump_rate * std::cosh(bump_rate * z);
    return w.d2 * g + 2.0 * w.d1 * g1 + w.w * g2;
}

double second_derivative(const MollifiedFunction& m, double z) { return m.d2(z); }

namespace {

MollifiedFunction build(const ScalarFunction& f, double epsilon, double radius, double h,
                        double gamma) {
    MollifiedFunction m;
    m.base = f;
    m.epsilon = epsilon;
    m.radius = radius;
    m.smoothing_width = h;
    m.bump_weight = gamma;
    m.bump_rate = 1.0 / std::max(1.0, radius);
    m.taper_band = 1.0;

    switch (f.kind()) {
    case FunctionKind::Abs:
        m.core = MollifiedFunction::CoreKind::PwlConvolution;
        m.pwl_a0 = 0.0;
        m.pwl_b0 = -1.0;
        m.knots = {0.0};
        m.jumps = {2.0};
        break;
    case FunctionKind::Relu:
        m.core = MollifiedFunction::CoreKind::PwlConvolution;
        m.knots = {0.0};
        m.jumps = {1.0};
        break;
    case FunctionKind::Linear:
        m.core = MollifiedFunction::CoreKind::PwlConvolution;
        m.pwl_b0 = f.params()[0];
        m.pwl_a0 = f.params()[1];
        break;
    case FunctionKind::NegLinear:
        m.core = MollifiedFunction::CoreKind::PwlConvolution;
        m.pwl_b0 = -1.0;
        break;
    case FunctionKind::PiecewiseLinear: {
        m.core = MollifiedFunction::CoreKind::PwlConvolution;
        const auto& p = f.params();
        const size_t nk = p.size() / 2;
        const double s0 = (p[3] - p[1]) / (p[2] - p[0]);
        m.pwl_b0 = s0;
        m.pwl_a0 = p[1] - s0 * p[0];
        double prev = s0;
        for (size_t k = 1; k + 1 < nk; ++k) {
            const double sk = (p[2 * k + 3] - p[2 * k + 1]) / (p[2 * k + 2] - p[2 * k]);
            m.knots.push_back(p[2 * k]);
            m.jumps.push_back(sk - prev);
            prev = sk;
        }
        break;
    }
    case FunctionKind::Quadratic:
        m.core = MollifiedFunction::CoreKind::QuadraticConvolution;
        m.quad_q = f.params()[0];
        break;
    case FunctionKind::ExpScaled:
        m.core = MollifiedFunction::CoreKind::ExpConvolution;
        m.exp_a = f.params()[0];
        m.exp_b = f.params()[1];
        break;
    case FunctionKind::Softplus:
        m.core = MollifiedFunction::CoreKind::Identity;
        m.smoothing_width = 0.0;
        break;
    case FunctionKind::Power:
        if (f.params()[0] < 2.0)
            throw MollificationError("power exponents below 2 lack a C^2 smoothing here");
        m.core = MollifiedFunction::CoreKind::Identity;
        m.smoothing_width = 0.0;
        break;
    case FunctionKind::Mollified:
        throw SpecError("refusing to mollify an already mollified function");
    default:
        throw HypothesisViolation("mollify requires a convex profile: " + to_string(f.kind()));
    }
    return m;
}

double sup_error_on_core(const ScalarFunction& f, const MollifiedFunction& m, int grid) {
    double worst = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const double z = -m.radius + 2.0 * m.radius * i / grid;
        worst = std::max(worst, std::abs(f(z) - m.value(z)));
    }
    return worst;
}

} // namespace

MollifiedFunction mollify_with(const ScalarFunction& f, double epsilon, double radius, double h,
                               double gamma) {
    if (!(epsilon > 0.0) || !(radius > 0.0))
        throw SpecError("mollify needs epsilon > 0 and radius > 0");
    return build(f, epsilon, radius, h, gamma);
}

MollifiedFunction mollify(const ScalarFunction& f, double epsilon, double radius) {
    if (!(epsilon > 0.0) || !(radius > 0.0))
        throw SpecError("mollify needs epsilon > 0 and radius > 0");

    // The comparison machinery only certifies convex profiles; reject others
    // before doing any tuning.
    const CheckResult conv = convexity_check(f, -radius - 2.0, radius + 2.0, 512);
    if (!conv.ok) {
        std::ostringstream msg;
        msg << "mollify precondition failed: profile is not convex near z = " << conv.witness_z
            << " (second difference " << conv.worst << ")";
        throw HypothesisViolation(msg.str());
    }

    const double alpha = 1.0 / std::max(1.0, radius);
    const double bump_max = std::cosh(alpha * radius) - 1.0;
    const double gamma = 0.5 * epsilon / bump_max;

    // Analytic seed for the smoothing width; each family knows how far its
    // exact convolution strays from the raw profile.
    double h;
    switch (f.kind()) {
    case FunctionKind::Abs: h = 0.5 * epsilon / (2.0 * kInvSqrt2Pi); break;
    case FunctionKind::Relu: h = 0.5 * epsilon / kInvSqrt2Pi; break;
    case FunctionKind::PiecewiseLinear: {
        MollifiedFunction probe = build(f, epsilon, radius, 1.0, gamma);
        double jump_mass = 0.0;
        for (double j : probe.jumps) jump_mass += std::abs(j);
        h = jump_mass > 0.0 ? 0.5 * epsilon / (jump_mass * kInvSqrt2Pi) : 0.25;
        break;
    }
    case FunctionKind::Quadratic:
        h = std::sqrt(0.5 * epsilon / std::max(f.params()[0], 1e-12));
        break;
    case FunctionKind::ExpScaled: {
        const double a = std::abs(f.params()[0]), b = f.params()[1];
        const double peak = a * std::exp(std::abs(b) * radius);
        h = b != 0.0 ? std::sqrt(2.0 * std::log1p(0.5 * epsilon / peak) / (b * b)) : 0.25;
        break;
    }
    default: h = 0.25; break; // identity cores and plain linear: width is inert
    }
    h = std::clamp(h, 1e-10, 1.0);

    for (int attempt = 0; attempt < 60; ++attempt) {
        MollifiedFunction m = build(f, epsilon, radius, h, gamma);
        if (sup_error_on_core(f, m, 4096) <= epsilon) return m;
        h *= 0.5;
        if (h < 1e-12)
            throw MollificationError(
                "could not meet the accuracy budget; retry with a larger epsilon");
    }
    throw MollificationError("smoothing width tuning did not converge; retry with a larger epsilon");
}

} // namespace diffcomp::convex
