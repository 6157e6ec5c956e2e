#pragma once

#include <cstdint>
#include <vector>

#include "diffcomp/field.hpp"

namespace diffcomp::model {

// Tolerance for order comparisons: a matrix counts as positive semidefinite
// when its smallest eigenvalue is above -kOrderTol, and a drift gap counts as
// nonnegative above the same margin.
inline constexpr double kOrderTol = 1e-10;

// An Ito diffusion dX = drift(X) dt + dispersion(X) dW on R^dim.
struct DiffusionModel {
    int dim = 0;
    Vec x0;
    CoefficientField drift;      // dim x 1
    CoefficientField dispersion; // dim x dim

    DiffusionModel(int dim, Vec x0, CoefficientField drift, CoefficientField dispersion);

    void drift_into(const Vec& x, Vec& out) const;
    void dispersion_into(const Vec& x, Mat& out) const;
    Mat diffusion_matrix(const Vec& x) const; // sigma sigma^T
    bool constant_coefficients() const;
};

Mat eval_dispersion(const DiffusionModel& m, const Vec& x);

// B - A is positive semidefinite up to tol (smallest eigenvalue >= -tol).
bool loewner_leq(const Mat& A, const Mat& B, double tol = kOrderTol);

struct EllipticityReport {
    double lambda_min = 0.0; // smallest eigenvalue of sigma sigma^T seen
    double lambda_max = 0.0; // largest eigenvalue seen
    int sample_count = 0;
    double region_radius = 0.0;
    bool degenerate() const { return lambda_min <= 0.0; }
};

struct OrderReport {
    bool diffusion_order_ok = false;
    bool drift_order_ok = false;
    double worst_eigenvalue = 0.0; // most negative eigenvalue of rho rho^T - sigma sigma^T
    double worst_drift_gap = 0.0;  // most negative component of nu - mu
    std::vector<Vec> sample_points;
};

// Samples a deterministic low-discrepancy point set in the ball of the given
// radius (plus the origin and both starting points) and compares the two
// models' diffusion matrices in the Loewner order and drifts componentwise.
OrderReport order_scan(const DiffusionModel& x_side, const DiffusionModel& y_side,
                       double radius, int samples, std::uint64_t seed);

// Empirical Lipschitz constant of the field over pair samples in the ball.
// Throws HypothesisViolation if a sampled slope exceeds the declared constant
// by more than a relative 1e-9 margin.
double lipschitz_probe(const CoefficientField& field, double radius, int pairs,
                       std::uint64_t seed);

EllipticityReport ellipticity_scan(const DiffusionModel& m, double radius, int samples,
                                   std::uint64_t seed);

// Deterministic low-discrepancy sampler used by the scans; exposed so other
// components (counterexample search, acceptance battery) reuse one source.
class BallSampler {
public:
    BallSampler(int dim, double radius, std::uint64_t seed);
    Vec next();

private:
    int dim_;
    double radius_;
    std::uint64_t index_;
    std::vector<double> alphas_;
};

} // namespace diffcomp::model
