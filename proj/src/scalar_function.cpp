#include "diffcomp/scalar_function.hpp"

#include <cmath>

#include "diffcomp/errors.hpp"
#include "diffcomp/mollify.hpp"

namespace diffcomp::convex {

std::string to_string(FunctionKind kind) {
    switch (kind) {
    case FunctionKind::Abs: return "abs";
    case FunctionKind::Power: return "power";
    case FunctionKind::Relu: return "relu";
    case FunctionKind::Softplus: return "softplus";
    case FunctionKind::Quadratic: return "quadratic";
    case FunctionKind::ExpScaled: return "exp-scaled";
    case FunctionKind::Linear: return "linear";
    case FunctionKind::NegLinear: return "neg-linear";
    case FunctionKind::NegQuadratic: return "neg-quadratic";
    case FunctionKind::PiecewiseLinear: return "piecewise-linear";
    case FunctionKind::Mollified: return "mollified";
    }
    return "unknown";
}

FunctionKind function_kind_from_string(const std::string& name) {
    if (name == "abs") return FunctionKind::Abs;
    if (name == "power") return FunctionKind::Power;
    if (name == "relu") return FunctionKind::Relu;
    if (name == "softplus") return FunctionKind::Softplus;
    if (name == "quadratic") return FunctionKind::Quadratic;
    if (name == "exp-scaled") return FunctionKind::ExpScaled;
    if (name == "linear") return FunctionKind::Linear;
    if (name == "neg-linear") return FunctionKind::NegLinear;
    if (name == "neg-quadratic") return FunctionKind::NegQuadratic;
    if (name == "piecewise-linear") return FunctionKind::PiecewiseLinear;
    throw SpecError("unknown scalar function kind: " + name);
}

ScalarFunction::ScalarFunction(FunctionKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
    switch (kind_) {
    case FunctionKind::Abs:
    case FunctionKind::Relu:
    case FunctionKind::Softplus:
    case FunctionKind::NegLinear:
    case FunctionKind::NegQuadratic:
        if (!params_.empty()) throw SpecError("this function kind takes no parameters");
        break;
    case FunctionKind::Power:
        if (params_.size() != 1 || params_[0] < 1.0)
            throw SpecError("power function needs a single exponent >= 1");
        break;
    case FunctionKind::Quadratic:
        if (params_.empty()) params_ = {1.0};
        if (params_.size() != 1) throw SpecError("quadratic takes at most one scale parameter");
        break;
    case FunctionKind::ExpScaled:
        if (params_.size() != 2) throw SpecError("exp-scaled needs parameters [A, B]");
        break;
    case FunctionKind::Linear:
        if (params_.empty()) params_ = {1.0, 0.0};
        if (params_.size() == 1) params_.push_back(0.0);
        if (params_.size() != 2) throw SpecError("linear takes parameters [slope, intercept]");
        break;
    case FunctionKind::PiecewiseLinear: {
        if (params_.size() < 4 || params_.size() % 2 != 0)
            throw SpecError("piecewise-linear needs at least two (z, f) knot pairs");
        for (size_t i = 2; i < params_.size(); i += 2)
            if (!(params_[i] > params_[i - 2]))
                throw SpecError("piecewise-linear knots must have strictly increasing z");
        break;
    }
    case FunctionKind::Mollified:
        throw SpecError("construct mollified functions through ScalarFunction::mollified");
    }
}

ScalarFunction ScalarFunction::mollified(std::shared_ptr<const MollifiedFunction> m) {
    if (!m) throw SpecError("mollified function handle is null");
    ScalarFunction f;
    f.kind_ = FunctionKind::Mollified;
    f.mollified_ = std::move(m);
    return f;
}

double ScalarFunction::operator()(double z) const {
    switch (kind_) {
    case FunctionKind::Abs: return std::abs(z);
    case FunctionKind::Power: return std::pow(std::abs(z), params_[0]);
    case FunctionKind::Relu: return z > 0.0 ? z : 0.0;
    case FunctionKind::Softplus:
        // Stable in both tails.
        return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case FunctionKind::Quadratic: return params_[0] * z * z;
    case FunctionKind::ExpScaled: return params_[0] * std::exp(params_[1] * z);
    case FunctionKind::Linear: return params_[0] * z + params_[1];
    case FunctionKind::NegLinear: return -z;
    case FunctionKind::NegQuadratic: return -z * z;
    case FunctionKind::PiecewiseLinear: {
        const size_t m = params_.size() / 2;
        auto zk = [&](size_t k) { return params_[2 * k]; };
        auto fk = [&](size_t k) { return params_[2 * k + 1]; };
        size_t seg = 0;
        if (z <= zk(0)) {
            seg = 0;
        } else if (z >= zk(m - 1)) {
            seg = m - 2;
        } else {
            while (seg + 2 < m && z > zk(seg + 1)) ++seg;
        }
        const double slope = (fk(seg + 1) - fk(seg)) / (zk(seg + 1) - zk(seg));
        return fk(seg) + slope * (z - zk(seg));
    }
    case FunctionKind::Mollified: return mollified_->value(z);
    }
    throw SpecError("unreachable scalar function kind");
}

} // namespace diffcomp::convex
