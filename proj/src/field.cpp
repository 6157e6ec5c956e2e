#include "diffcomp/field.hpp"

#include <algorithm>
#include <cmath>

#include "diffcomp/errors.hpp"

namespace diffcomp::model {

std::string to_string(FieldKind kind) {
    switch (kind) {
    case FieldKind::Constant: return "constant";
    case FieldKind::AffineClamped: return "affine-clamped";
    case FieldKind::TrigPerturbed: return "trig-perturbed";
    case FieldKind::TableInterpolated: return "table-interpolated";
    }
    return "unknown";
}

FieldKind field_kind_from_string(const std::string& name) {
    if (name == "constant") return FieldKind::Constant;
    if (name == "affine-clamped") return FieldKind::AffineClamped;
    if (name == "trig-perturbed") return FieldKind::TrigPerturbed;
    if (name == "table-interpolated") return FieldKind::TableInterpolated;
    throw SpecError("unknown coefficient field kind: " + name);
}

CoefficientField CoefficientField::constant(int dim_in, const Mat& values) {
    std::vector<double> params(values.size());
    for (int r = 0; r < values.rows(); ++r)
        for (int c = 0; c < values.cols(); ++c)
            params[static_cast<size_t>(r) * values.cols() + c] = values(r, c);
    return from_params(FieldKind::Constant, dim_in, static_cast<int>(values.rows()),
                       static_cast<int>(values.cols()), params);
}

CoefficientField CoefficientField::from_params(FieldKind kind, int dim_in, int rows, int cols,
                                               const std::vector<double>& params) {
    if (dim_in <= 0 || rows <= 0 || cols <= 0)
        throw SpecError("coefficient field dimensions must be positive");

    CoefficientField f;
    f.kind_ = kind;
    f.dim_in_ = dim_in;
    f.rows_ = rows;
    f.cols_ = cols;
    f.params_ = params;

    const size_t entries = static_cast<size_t>(rows) * cols;
    switch (kind) {
    case FieldKind::Constant:
        if (params.size() != entries)
            throw SpecError("constant field expects rows*cols parameters");
        break;
    case FieldKind::AffineClamped: {
        const size_t stride = static_cast<size_t>(dim_in) + 3;
        if (params.size() != entries * stride)
            throw SpecError("affine-clamped field expects (dim+3) parameters per entry");
        for (size_t e = 0; e < entries; ++e) {
            const double lo = params[e * stride + dim_in + 1];
            const double hi = params[e * stride + dim_in + 2];
            if (!(lo <= hi))
                throw SpecError("affine-clamped entry has lo > hi");
        }
        break;
    }
    case FieldKind::TrigPerturbed: {
        const size_t stride = static_cast<size_t>(dim_in) + 3;
        if (params.size() != entries * stride)
            throw SpecError("trig-perturbed field expects (dim+3) parameters per entry");
        break;
    }
    case FieldKind::TableInterpolated: {
        if (params.size() < 4)
            throw SpecError("table-interpolated field is missing its header");
        const int axis = static_cast<int>(params[0]);
        const double lo = params[1], hi = params[2];
        const int m = static_cast<int>(params[3]);
        if (axis < 0 || axis >= dim_in)
            throw SpecError("table-interpolated axis out of range");
        if (!(lo < hi) || m < 2)
            throw SpecError("table-interpolated needs lo < hi and at least two points");
        if (params.size() != 4 + entries * static_cast<size_t>(m))
            throw SpecError("table-interpolated value count does not match header");
        break;
    }
    }

    f.finalize_constants();
    return f;
}

void CoefficientField::finalize_constants() {
    const size_t entries = static_cast<size_t>(rows_) * cols_;
    double bound_sq = 0.0;
    double lip_sq = 0.0;

    switch (kind_) {
    case FieldKind::Constant:
        for (double v : params_) bound_sq += v * v;
        break;
    case FieldKind::AffineClamped: {
        const size_t stride = static_cast<size_t>(dim_in_) + 3;
        for (size_t e = 0; e < entries; ++e) {
            const double* p = params_.data() + e * stride;
            const double lo = p[dim_in_ + 1], hi = p[dim_in_ + 2];
            const double eb = std::max(std::abs(lo), std::abs(hi));
            double g2 = 0.0;
            for (int j = 0; j < dim_in_; ++j) g2 += p[1 + j] * p[1 + j];
            bound_sq += eb * eb;
            lip_sq += g2; // clamp is 1-Lipschitz on top of the affine part
        }
        break;
    }
    case FieldKind::TrigPerturbed: {
        const size_t stride = static_cast<size_t>(dim_in_) + 3;
        for (size_t e = 0; e < entries; ++e) {
            const double* p = params_.data() + e * stride;
            const double eb = std::abs(p[0]) + std::abs(p[1]);
            double f2 = 0.0;
            for (int j = 0; j < dim_in_; ++j) f2 += p[2 + j] * p[2 + j];
            bound_sq += eb * eb;
            lip_sq += p[1] * p[1] * f2;
        }
        break;
    }
    case FieldKind::TableInterpolated: {
        const int m = static_cast<int>(params_[3]);
        const double lo = params_[1], hi = params_[2];
        const double h = (hi - lo) / (m - 1);
        for (size_t e = 0; e < entries; ++e) {
            const double* v = params_.data() + 4 + e * static_cast<size_t>(m);
            double eb = 0.0, slope = 0.0;
            for (int k = 0; k < m; ++k) {
                eb = std::max(eb, std::abs(v[k]));
                if (k > 0) slope = std::max(slope, std::abs(v[k] - v[k - 1]) / h);
            }
            bound_sq += eb * eb;
            lip_sq += slope * slope;
        }
        break;
    }
    }

    bound_ = std::sqrt(bound_sq);
    lipschitz_ = std::sqrt(lip_sq);
}

void CoefficientField::eval_into(const Vec& x, Mat& out) const {
    if (x.size() != dim_in_)
        throw SpecError("coefficient field evaluated at a point of wrong dimension");
    out.resize(rows_, cols_);

    switch (kind_) {
    case FieldKind::Constant: {
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c)
                out(r, c) = params_[static_cast<size_t>(r) * cols_ + c];
        break;
    }
    case FieldKind::AffineClamped: {
        const size_t stride = static_cast<size_t>(dim_in_) + 3;
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) {
                const double* p = params_.data() + (static_cast<size_t>(r) * cols_ + c) * stride;
                double v = p[0];
                for (int j = 0; j < dim_in_; ++j) v += p[1 + j] * x[j];
                out(r, c) = std::clamp(v, p[dim_in_ + 1], p[dim_in_ + 2]);
            }
        break;
    }
    case FieldKind::TrigPerturbed: {
        const size_t stride = static_cast<size_t>(dim_in_) + 3;
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) {
                const double* p = params_.data() + (static_cast<size_t>(r) * cols_ + c) * stride;
                double arg = p[dim_in_ + 2];
                for (int j = 0; j < dim_in_; ++j) arg += p[2 + j] * x[j];
                out(r, c) = p[0] + p[1] * std::sin(arg);
            }
        break;
    }
    case FieldKind::TableInterpolated: {
        const int axis = static_cast<int>(params_[0]);
        const double lo = params_[1], hi = params_[2];
        const int m = static_cast<int>(params_[3]);
        const double t = (x[axis] - lo) / (hi - lo) * (m - 1);
        const double tc = std::clamp(t, 0.0, static_cast<double>(m - 1));
        const int k = std::min(static_cast<int>(tc), m - 2);
        const double w = tc - k;
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) {
                const double* v =
                    params_.data() + 4 + (static_cast<size_t>(r) * cols_ + c) * static_cast<size_t>(m);
                out(r, c) = v[k] * (1.0 - w) + v[k + 1] * w;
            }
        break;
    }
    }
}

Mat CoefficientField::eval(const Vec& x) const {
    Mat out;
    eval_into(x, out);
    return out;
}

bool CoefficientField::is_constant_zero() const {
    if (kind_ != FieldKind::Constant) return false;
    return std::all_of(params_.begin(), params_.end(), [](double v) { return v == 0.0; });
}

CoefficientField CoefficientField::with_declared_lipschitz(double c) const {
    CoefficientField f = *this;
    f.lipschitz_ = c;
    return f;
}

} // namespace diffcomp::model
