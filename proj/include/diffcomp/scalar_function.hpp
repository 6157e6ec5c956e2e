#pragma once

#include <memory>
#include <string>
#include <vector>

namespace diffcomp::convex {

struct MollifiedFunction;

// Univariate payoff profiles. Parameters by kind:
//   Abs            |z|                              (no params)
//   Power          |z|^p                            params: [p], p >= 1
//   Relu           max(z, 0)                        (no params)
//   Softplus       log(1 + e^z)                     (no params)
//   Quadratic      q * z^2                          params: [q] (default 1)
//   ExpScaled      A * e^(B z)                      params: [A, B]
//   Linear         s * z + t                        params: [s, t] (default z)
//   NegLinear      -z                               (no params)
//   NegQuadratic   -z^2                             (no params)
//   PiecewiseLinear interpolates (z_k, f_k) knots   params: [z_1, f_1, ..., z_m, f_m],
//                  end-slope extrapolation outside the knot range
//   Mollified      wraps a smoothed profile built by mollify()
enum class FunctionKind {
    Abs,
    Power,
    Relu,
    Softplus,
    Quadratic,
    ExpScaled,
    Linear,
    NegLinear,
    NegQuadratic,
    PiecewiseLinear,
    Mollified,
};

std::string to_string(FunctionKind kind);
FunctionKind function_kind_from_string(const std::string& name);

class ScalarFunction {
public:
    ScalarFunction() = default;
    ScalarFunction(FunctionKind kind, std::vector<double> params = {});
    static ScalarFunction mollified(std::shared_ptr<const MollifiedFunction> m);

    double operator()(double z) const;

    FunctionKind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    const MollifiedFunction* mollified_handle() const { return mollified_.get(); }
    std::shared_ptr<const MollifiedFunction> mollified_shared() const { return mollified_; }

private:
    FunctionKind kind_ = FunctionKind::Abs;
    std::vector<double> params_;
    std::shared_ptr<const MollifiedFunction> mollified_;
};

} // namespace diffcomp::convex
