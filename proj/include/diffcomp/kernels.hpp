#pragma once

#include <Eigen/Dense>

#include "diffcomp/mollify.hpp"

namespace diffcomp::kernels {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Gaussian transition kernels of constant-coefficient diffusions
// dX = b dt + sigma dW, parameterized by A = sigma sigma^T / 2 and b.
//
// eval(t, x, s, y) with s > t returns the density (in y) of X_s given
// X_t = x, together with first and second derivatives taken in the first
// space argument x. The adjoint kernel is the same object with the drift
// negated; pairing K.eval(t, x, s, y) with K.adjoint().eval(t, y, s, x)
// gives equal values, negated gradients and equal Hessians, which is the
// duality the derivative-transfer identity below rests on.

enum class Direction { Forward, Adjoint };

struct KernelEval {
    double value = 0.0;
    Vec grad; // d/d(first space argument)
    Mat hess;
};

class ConstKernel {
public:
    ConstKernel(Mat a, Vec b, Direction direction = Direction::Forward);

    KernelEval eval(double t, const Vec& x, double s, const Vec& y) const;
    ConstKernel adjoint() const;

    const Mat& a() const { return a_; }
    const Vec& b() const { return b_; }
    Direction direction() const { return direction_; }
    int dim() const { return static_cast<int>(b_.size()); }

private:
    Mat a_; // symmetric positive definite
    Vec b_;
    Direction direction_;
};

// Residuals of the value/gradient/Hessian duality between a kernel and its
// adjoint at one argument pair, all relative to the kernel value scale.
struct DualityReport {
    double value_residual = 0.0;
    double grad_residual = 0.0; // after the sign flip
    double hess_residual = 0.0;
    double max_residual = 0.0;
    bool ok = false;
};

DualityReport duality_check(const ConstKernel& kernel, double t, const Vec& x, double s,
                            const Vec& y, double tol = 1e-10);

// Checks the off-diagonal bound
//   p(t, x; s, y) <= c_star * dt^(-d/2) * exp(-lambda_star |y - x - b dt|^2 / dt)
// over a grid of time gaps and offsets. Failures carry a witness.
struct BoundParams {
    double c_star = 1.0;
    double lambda_star = 0.25;
};

struct GaussianBoundReport {
    bool ok = false;
    double worst_ratio = 0.0; // max of  p / bound  over the probe grid
    double witness_dt = 0.0;
    Vec witness_offset;
};

GaussianBoundReport gaussian_bound_check(const ConstKernel& kernel, const BoundParams& params,
                                         double dt_min, double dt_max, double offset_radius,
                                         int samples);

// Transfer of second derivatives from the kernel onto the payoff profile:
// for smooth compactly supported f and weights c,
//   int f(<c,y>) d^2/dx_i dx_j p(t,x;s,y) dy
//     = c_i c_j int f''(<c,y>) p_adj(t,y;s,x) dy
// where p_adj is the adjoint kernel. Both sides are computed by tensor
// quadrature; the report carries the two matrices and their gap.
struct HessianTransferReport {
    Mat lhs;
    Mat rhs;
    double max_abs_diff = 0.0;
    double scale = 0.0; // largest entry magnitude across both sides
    bool ok = false;
};

HessianTransferReport hessian_transfer_check(const ConstKernel& kernel,
                                             const convex::MollifiedFunction& payoff,
                                             const Vec& weights, double t, const Vec& x, double s,
                                             int nodes_per_axis, double tol = 1e-6);

// Quadrature residual of  int p(t, x; s, y) dy = 1.
double normalization_residual(const ConstKernel& kernel, double dt, const Vec& x,
                              int nodes_per_axis);

// Quadrature residual of the two-step composition law
//   int p(t, x; r, z) p(r, z; s, y) dz = p(t, x; s, y).
double composition_residual(const ConstKernel& kernel, double dt1, double dt2, const Vec& x,
                            const Vec& y, int nodes_per_axis);

} // namespace diffcomp::kernels
