#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace diffcomp::model {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Declarative coefficient families. Every kind is globally bounded and
// globally Lipschitz with constants computable from its parameters, which is
// what the hypothesis probes check against.
enum class FieldKind {
    Constant,          // fixed matrix, params = row-major values
    AffineClamped,     // per entry: offset + <g, x>, clamped to [lo, hi]
    TrigPerturbed,     // per entry: base + amp * sin(<freq, x> + phase)
    TableInterpolated, // per entry: piecewise-linear table in one coordinate
};

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

// A map R^dim_in -> R^{rows x cols}. Drifts are (n x 1), dispersions (n x n).
//
// Parameter layouts (all row-major over entries):
//   Constant:          rows*cols values.
//   AffineClamped:     per entry [offset, g_1..g_dim, lo, hi].
//   TrigPerturbed:     per entry [base, amp, f_1..f_dim, phase].
//   TableInterpolated: header [axis, lo, hi, m], then rows*cols*m table values
//                      (entry-major); constant extrapolation outside [lo, hi].
class CoefficientField {
public:
    static CoefficientField constant(int dim_in, const Mat& values);
    static CoefficientField from_params(FieldKind kind, int dim_in, int rows, int cols,
                                        const std::vector<double>& params);

    void eval_into(const Vec& x, Mat& out) const;
    Mat eval(const Vec& x) const;

    FieldKind kind() const { return kind_; }
    int dim_in() const { return dim_in_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    // Upper bound on |F(x)|_F over all x.
    double bound() const { return bound_; }
    // Lipschitz constant: |F(x) - F(y)|_F <= lipschitz() * |x - y|_2.
    double lipschitz() const { return lipschitz_; }

    bool is_constant_zero() const;
    const std::vector<double>& params() const { return params_; }

    // Testing hook: report a smaller constant than the family guarantees, so
    // the probe's violation path can be exercised.
    CoefficientField with_declared_lipschitz(double c) const;

private:
    CoefficientField() = default;
    void finalize_constants();

    FieldKind kind_ = FieldKind::Constant;
    int dim_in_ = 0;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> params_;
    double bound_ = 0.0;
    double lipschitz_ = 0.0;
};

} // namespace diffcomp::model
