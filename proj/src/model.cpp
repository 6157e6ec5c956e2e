#include "diffcomp/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "diffcomp/errors.hpp"

namespace diffcomp::model {

DiffusionModel::DiffusionModel(int dim_, Vec x0_, CoefficientField drift_,
                               CoefficientField dispersion_)
    : dim(dim_), x0(std::move(x0_)), drift(std::move(drift_)), dispersion(std::move(dispersion_)) {
    if (dim <= 0) throw SpecError("diffusion model dimension must be positive");
    if (x0.size() != dim) throw SpecError("x0 does not match model dimension");
    if (drift.dim_in() != dim || drift.rows() != dim || drift.cols() != 1)
        throw SpecError("drift field must map R^n to R^n");
    if (dispersion.dim_in() != dim || dispersion.rows() != dim || dispersion.cols() != dim)
        throw SpecError("dispersion field must map R^n to n x n matrices");
}

void DiffusionModel::drift_into(const Vec& x, Vec& out) const {
    static thread_local Mat tmp;
    drift.eval_into(x, tmp);
    out = tmp.col(0);
}

void DiffusionModel::dispersion_into(const Vec& x, Mat& out) const {
    dispersion.eval_into(x, out);
}

Mat DiffusionModel::diffusion_matrix(const Vec& x) const {
    const Mat s = dispersion.eval(x);
    return s * s.transpose();
}

bool DiffusionModel::constant_coefficients() const {
    return drift.kind() == FieldKind::Constant && dispersion.kind() == FieldKind::Constant;
}

Mat eval_dispersion(const DiffusionModel& m, const Vec& x) { return m.dispersion.eval(x); }

bool loewner_leq(const Mat& A, const Mat& B, double tol) {
    if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
        throw SpecError("loewner_leq requires square matrices of equal size");
    const Mat diff = B - A;
    const Mat sym = 0.5 * (diff + diff.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

// ----------------------------------------------------------------------------
// Low-discrepancy sampling

namespace {

// Root of x^(d+1) = x + 1 (the d-dimensional generalization of the golden
// ratio); its inverse powers give a well-spread Kronecker sequence.
double plastic_gamma(int d) {
    double x = 1.5;
    for (int it = 0; it < 64; ++it) {
        const double f = std::pow(x, d + 1) - x - 1.0;
        const double fp = (d + 1) * std::pow(x, d) - 1.0;
        x -= f / fp;
    }
    return x;
}

} // namespace

BallSampler::BallSampler(int dim, double radius, std::uint64_t seed)
    : dim_(dim), radius_(radius), index_(seed % 100003u) {
    const double g = plastic_gamma(dim);
    alphas_.resize(dim);
    double a = 1.0;
    for (int i = 0; i < dim; ++i) {
        a /= g;
        alphas_[i] = a;
    }
}

Vec BallSampler::next() {
    Vec p(dim_);
    for (;;) {
        ++index_;
        double norm_sq = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double u = 0.5 + static_cast<double>(index_) * alphas_[i];
            u -= std::floor(u);
            p[i] = radius_ * (2.0 * u - 1.0);
            norm_sq += p[i] * p[i];
        }
        if (norm_sq <= radius_ * radius_) return p;
    }
}

// ----------------------------------------------------------------------------
// Hypothesis scans

OrderReport order_scan(const DiffusionModel& x_side, const DiffusionModel& y_side, double radius,
                       int samples, std::uint64_t seed) {
    if (x_side.dim != y_side.dim)
        throw SpecError("order_scan requires models of equal dimension");

    OrderReport rep;
    rep.sample_points.reserve(samples + 3);
    rep.sample_points.push_back(Vec::Zero(x_side.dim));
    rep.sample_points.push_back(x_side.x0);
    rep.sample_points.push_back(y_side.x0);
    BallSampler sampler(x_side.dim, radius, seed);
    for (int i = 0; i < samples; ++i) rep.sample_points.push_back(sampler.next());

    double worst_eig = std::numeric_limits<double>::infinity();
    double worst_gap = std::numeric_limits<double>::infinity();
    Mat sx, sy;
    Vec mx, my;
    for (const Vec& p : rep.sample_points) {
        x_side.dispersion_into(p, sx);
        y_side.dispersion_into(p, sy);
        const Mat diff = sy * sy.transpose() - sx * sx.transpose();
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (diff + diff.transpose()),
                                              Eigen::EigenvaluesOnly);
        worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());

        x_side.drift_into(p, mx);
        y_side.drift_into(p, my);
        worst_gap = std::min(worst_gap, (my - mx).minCoeff());
    }

    rep.worst_eigenvalue = worst_eig;
    rep.worst_drift_gap = worst_gap;
    rep.diffusion_order_ok = worst_eig >= -kOrderTol;
    rep.drift_order_ok = worst_gap >= -kOrderTol;
    return rep;
}

double lipschitz_probe(const CoefficientField& field, double radius, int pairs,
                       std::uint64_t seed) {
    BallSampler sampler(field.dim_in(), radius, seed);
    // Displacement ladder from half the region down to tiny offsets, so that
    // locally attained slopes (sup of the derivative) are seen as well.
    const double deltas[4] = {0.5 * radius, 0.05 * radius, 0.005 * radius,
                              5e-4 * std::max(radius, 1.0)};
    double max_slope = 0.0;
    Vec witness_a, witness_b;
    Mat fa, fb;
    for (int i = 0; i < pairs; ++i) {
        const Vec a = sampler.next();
        Vec dir = sampler.next();
        const double dn = dir.norm();
        if (dn < 1e-14) continue;
        dir /= dn;
        const Vec b = a + deltas[i % 4] * dir;
        field.eval_into(a, fa);
        field.eval_into(b, fb);
        const double dist = (b - a).norm();
        if (dist == 0.0) continue;
        const double slope = (fb - fa).norm() / dist;
        if (slope > max_slope) {
            max_slope = slope;
            witness_a = a;
            witness_b = b;
        }
    }

    const double declared = field.lipschitz();
    if (max_slope > declared * (1.0 + 1e-9) + 1e-12) {
        std::ostringstream msg;
        msg << "lipschitz_probe: sampled slope " << max_slope << " exceeds declared constant "
            << declared << " between x = [" << witness_a.transpose() << "] and y = ["
            << witness_b.transpose() << "]";
        throw HypothesisViolation(msg.str());
    }
    return max_slope;
}

EllipticityReport ellipticity_scan(const DiffusionModel& m, double radius, int samples,
                                   std::uint64_t seed) {
    EllipticityReport rep;
    rep.region_radius = radius;

    std::vector<Vec> points;
    points.push_back(Vec::Zero(m.dim));
    points.push_back(m.x0);
    BallSampler sampler(m.dim, radius, seed);
    for (int i = 0; i < samples; ++i) points.push_back(sampler.next());

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    Mat s;
    for (const Vec& p : points) {
        m.dispersion_into(p, s);
        const Mat a = s * s.transpose();
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
        hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    rep.lambda_min = lo;
    rep.lambda_max = hi;
    rep.sample_count = static_cast<int>(points.size());
    return rep;
}

} // namespace diffcomp::model
