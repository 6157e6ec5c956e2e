#include "diffcomp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "diffcomp/errors.hpp"
#include "diffcomp/gauss.hpp"

namespace diffcomp::kernels {

namespace {

// Tensor trapezoid rule over an axis-aligned box, n nodes per axis. The
// integrands below decay to machine zero at the box faces, so the rule
// converges far faster than its generic h^2 rate.
template <typename F>
void for_each_node(const Vec& lo, const Vec& hi, int n, F&& fn) {
    const int d = static_cast<int>(lo.size());
    if (n < 2) throw SpecError("quadrature needs at least 2 nodes per axis");
    double cell = 1.0;
    std::int64_t total = 1;
    for (int k = 0; k < d; ++k) {
        cell *= (hi[k] - lo[k]) / (n - 1);
        total *= n;
        if (total > 400'000'000) throw SpecError("quadrature lattice too large");
    }
    Vec y(d);
    for (std::int64_t flat = 0; flat < total; ++flat) {
        std::int64_t r = flat;
        double wgt = cell;
        for (int k = 0; k < d; ++k) {
            const int i = static_cast<int>(r % n);
            r /= n;
            y[k] = lo[k] + (hi[k] - lo[k]) * i / (n - 1);
            if (i == 0 || i == n - 1) wgt *= 0.5;
        }
        fn(y, wgt);
    }
}

double spectral_radius(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    return es.eigenvalues().maxCoeff();
}

} // namespace

ConstKernel::ConstKernel(Mat a, Vec b, Direction direction)
    : a_(std::move(a)), b_(std::move(b)), direction_(direction) {
    if (a_.rows() != a_.cols() || a_.rows() != b_.size() || b_.size() == 0)
        throw SpecError("kernel needs square A matching the drift length");
    if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a_.cwiseAbs().maxCoeff()))
        throw SpecError("kernel matrix A must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(a_);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw SpecError("kernel matrix A must be positive definite");
}

ConstKernel ConstKernel::adjoint() const {
    return ConstKernel(a_, -b_,
                       direction_ == Direction::Forward ? Direction::Adjoint
                                                        : Direction::Forward);
}

KernelEval ConstKernel::eval(double t, const Vec& x, double s, const Vec& y) const {
    if (!(s > t)) throw SpecError("kernel evaluation requires s > t");
    if (x.size() != b_.size() || y.size() != b_.size())
        throw SpecError("kernel evaluation arguments have the wrong dimension");
    const double dt = s - t;
    const Mat v = 2.0 * dt * a_;
    Eigen::LLT<Mat> llt(v);
    if (llt.info() != Eigen::Success) throw NumericError("kernel covariance is not SPD");

    const Vec u = x - y + dt * b_;
    const Vec vinv_u = llt.solve(u);
    double log_det = 0.0;
    const Mat l = llt.matrixL();
    for (int k = 0; k < l.rows(); ++k) log_det += 2.0 * std::log(l(k, k));
    const int d = dim();
    const double log_p = -0.5 * (d * std::log(2.0 * M_PI) + log_det + u.dot(vinv_u));

    KernelEval e;
    e.value = std::exp(log_p);
    e.grad = -e.value * vinv_u;
    Mat vinv = llt.solve(Mat::Identity(d, d));
    e.hess = e.value * (vinv_u * vinv_u.transpose() - vinv);
    return e;
}

DualityReport duality_check(const ConstKernel& kernel, double t, const Vec& x, double s,
                            const Vec& y, double tol) {
    const KernelEval fwd = kernel.eval(t, x, s, y);
    const KernelEval adj = kernel.adjoint().eval(t, y, s, x);

    DualityReport r;
    const double vden = std::max(std::abs(fwd.value), 1e-300);
    r.value_residual = std::abs(fwd.value - adj.value) / vden;
    const double gden =
        std::max({fwd.grad.cwiseAbs().maxCoeff(), adj.grad.cwiseAbs().maxCoeff(), vden});
    r.grad_residual = (fwd.grad + adj.grad).cwiseAbs().maxCoeff() / gden;
    const double hden =
        std::max({fwd.hess.cwiseAbs().maxCoeff(), adj.hess.cwiseAbs().maxCoeff(), vden});
    r.hess_residual = (fwd.hess - adj.hess).cwiseAbs().maxCoeff() / hden;
    r.max_residual = std::max({r.value_residual, r.grad_residual, r.hess_residual});
    r.ok = r.max_residual <= tol;
    return r;
}

GaussianBoundReport gaussian_bound_check(const ConstKernel& kernel, const BoundParams& params,
                                         double dt_min, double dt_max, double offset_radius,
                                         int samples) {
    if (!(dt_min > 0.0) || !(dt_max >= dt_min) || samples < 2 || !(offset_radius > 0.0))
        throw SpecError("bound check needs positive time gaps, radius and >= 2 samples");
    if (!(params.c_star > 0.0) || !(params.lambda_star > 0.0))
        throw SpecError("bound check needs positive constants");

    const int d = kernel.dim();
    const Mat v0 = 2.0 * kernel.a();
    Eigen::LLT<Mat> llt(v0);
    const Mat vinv0 = llt.solve(Mat::Identity(d, d));
    double log_det0 = 0.0;
    const Mat l = llt.matrixL();
    for (int k = 0; k < l.rows(); ++k) log_det0 += 2.0 * std::log(l(k, k));

    std::vector<Vec> dirs;
    for (int k = 0; k < d; ++k) dirs.push_back(Vec::Unit(d, k));
    if (d > 1) dirs.push_back(Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d))));

    GaussianBoundReport rep;
    rep.witness_offset = Vec::Zero(d);
    double worst_log = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < samples; ++it) {
        const double frac = static_cast<double>(it) / (samples - 1);
        const double dt = dt_min * std::pow(dt_max / dt_min, frac);
        for (const Vec& dir : dirs) {
            for (int ir = 0; ir < samples; ++ir) {
                const double r = offset_radius * ir / (samples - 1);
                const Vec w = r * dir; // offset of y from the mean x + b dt
                // log p with covariance 2 A dt, computed in log space so the
                // comparison survives both over- and underflow.
                const double quad = w.dot(vinv0 * w) / dt;
                const double log_p = -0.5 * (d * std::log(2.0 * M_PI) + log_det0 +
                                             d * std::log(dt) + quad);
                const double log_bound = std::log(params.c_star) - 0.5 * d * std::log(dt) -
                                         params.lambda_star * w.squaredNorm() / dt;
                const double log_ratio = log_p - log_bound;
                if (log_ratio > worst_log) {
                    worst_log = log_ratio;
                    rep.witness_dt = dt;
                    rep.witness_offset = w;
                }
            }
        }
    }
    rep.worst_ratio = std::exp(std::min(worst_log, 700.0));
    rep.ok = worst_log <= 1e-9;
    return rep;
}

HessianTransferReport hessian_transfer_check(const ConstKernel& kernel,
                                             const convex::MollifiedFunction& payoff,
                                             const Vec& weights, double t, const Vec& x, double s,
                                             int nodes_per_axis, double tol) {
    const int d = kernel.dim();
    if (weights.size() != d) throw SpecError("weight length must match the kernel dimension");
    const double dt = s - t;
    if (!(dt > 0.0)) throw SpecError("transfer check requires s > t");

    const Vec mean = x + dt * kernel.b();
    const double spread = 8.0 * std::sqrt(spectral_radius(2.0 * dt * kernel.a()));
    const Vec lo = mean.array() - spread;
    const Vec hi = mean.array() + spread;

    // The payoff vanishes outside its support; the probe must overlap it or
    // both sides degenerate to zero and the check says nothing.
    const double z_center = weights.dot(mean);
    const double z_spread = weights.cwiseAbs().sum() * spread;
    if (z_center - z_spread >= payoff.support_radius() ||
        z_center + z_spread <= -payoff.support_radius())
        throw SpecError("probe region misses the payoff support");

    const ConstKernel adj = kernel.adjoint();
    HessianTransferReport rep;
    rep.lhs = Mat::Zero(d, d);
    double rhs_scalar = 0.0;
    for_each_node(lo, hi, nodes_per_axis, [&](const Vec& y, double wgt) {
        const double z = weights.dot(y);
        const double fv = payoff.value(z);
        const double f2 = payoff.d2(z);
        if (fv != 0.0) {
            const KernelEval e = kernel.eval(t, x, s, y);
            rep.lhs += (wgt * fv) * e.hess;
        }
        if (f2 != 0.0) rhs_scalar += wgt * f2 * adj.eval(t, y, s, x).value;
    });
    rep.rhs = rhs_scalar * (weights * weights.transpose());
    rep.max_abs_diff = (rep.lhs - rep.rhs).cwiseAbs().maxCoeff();
    rep.scale = std::max(rep.lhs.cwiseAbs().maxCoeff(), rep.rhs.cwiseAbs().maxCoeff());
    rep.ok = rep.max_abs_diff <= tol * std::max(1.0, rep.scale);
    return rep;
}

double normalization_residual(const ConstKernel& kernel, double dt, const Vec& x,
                              int nodes_per_axis) {
    const Vec mean = x + dt * kernel.b();
    const double spread = 8.0 * std::sqrt(spectral_radius(2.0 * dt * kernel.a()));
    const Vec lo = mean.array() - spread;
    const Vec hi = mean.array() + spread;
    double mass = 0.0;
    for_each_node(lo, hi, nodes_per_axis,
                  [&](const Vec& y, double wgt) { mass += wgt * kernel.eval(0.0, x, dt, y).value; });
    return std::abs(mass - 1.0);
}

double composition_residual(const ConstKernel& kernel, double dt1, double dt2, const Vec& x,
                            const Vec& y, int nodes_per_axis) {
    const Vec mean = x + dt1 * kernel.b();
    const double spread = 8.0 * std::sqrt(spectral_radius(2.0 * dt1 * kernel.a()));
    const Vec lo = mean.array() - spread;
    const Vec hi = mean.array() + spread;
    double acc = 0.0;
    for_each_node(lo, hi, nodes_per_axis, [&](const Vec& z, double wgt) {
        acc += wgt * kernel.eval(0.0, x, dt1, z).value * kernel.eval(dt1, z, dt1 + dt2, y).value;
    });
    const double direct = kernel.eval(0.0, x, dt1 + dt2, y).value;
    return std::abs(acc - direct) / std::max(direct, 1e-300);
}

} // namespace diffcomp::kernels
