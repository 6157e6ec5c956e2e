#include "diffcomp/pde.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "diffcomp/errors.hpp"
#include "diffcomp/gauss.hpp"
#include "diffcomp/mollify.hpp"

namespace diffcomp::pde {

namespace {

using convex::FunctionKind;
using convex::MollifiedFunction;
using convex::ScalarFunction;

// E f(z + r*delta + sqrt(s2*delta) * xi) for boundary nodes. Families whose
// Gaussian expectation has a closed form (piecewise-linear cores, quadratics,
// scaled exponentials, and their smoothed versions) are evaluated exactly;
// everything else falls back to quadrature, which the solver only permits in
// one dimension where boundary work is negligible.
class GaussianBridge {
public:
    GaussianBridge(const convex::PayoffSpec& payoff, const DiffusionModel& model,
                   double horizon, double max_boundary_z) {
        const Vec& c = payoff.weights;
        const Vec mu = model.drift.eval(model.x0).col(0);
        const model::Mat sig = model.dispersion.eval(model.x0);
        rate_ = c.dot(mu);
        s2_ = c.dot(sig * sig.transpose() * c);
        f_ = payoff.f;

        const ScalarFunction& f = payoff.f;
        double h = 0.0;
        const MollifiedFunction* m = nullptr;
        FunctionKind k = f.kind();
        if (k == FunctionKind::Mollified) {
            m = f.mollified_handle();
            h = m->smoothing_width;
            bump_gamma_ = m->bump_weight;
            bump_alpha_ = m->bump_rate;
            switch (m->core) {
            case MollifiedFunction::CoreKind::PwlConvolution:
                mode_ = Mode::Pwl;
                a0_ = m->pwl_a0;
                b0_ = m->pwl_b0;
                knots_ = m->knots;
                jumps_ = m->jumps;
                break;
            case MollifiedFunction::CoreKind::QuadraticConvolution:
                mode_ = Mode::Quad;
                quad_q_ = m->quad_q;
                break;
            case MollifiedFunction::CoreKind::ExpConvolution:
                mode_ = Mode::Exp;
                exp_a_ = m->exp_a;
                exp_b_ = m->exp_b;
                break;
            case MollifiedFunction::CoreKind::Identity: mode_ = Mode::Numeric; break;
            }
            if (mode_ != Mode::Numeric) {
                // The closed forms ignore the compact-support window, which is
                // only legitimate while the boundary mass stays well inside it.
                const double drift_reach = std::abs(rate_) * horizon;
                const double noise_reach = 6.0 * std::sqrt(s2_ * horizon + h * h);
                if (max_boundary_z + drift_reach + noise_reach > m->radius)
                    throw SpecError(
                        "smoothing support too small for exact boundary values; enlarge the "
                        "smoothing radius or switch to frozen boundary data");
            }
        } else {
            switch (k) {
            case FunctionKind::Abs:
                mode_ = Mode::Pwl;
                b0_ = -1.0;
                knots_ = {0.0};
                jumps_ = {2.0};
                break;
            case FunctionKind::Relu:
                mode_ = Mode::Pwl;
                knots_ = {0.0};
                jumps_ = {1.0};
                break;
            case FunctionKind::Linear:
                mode_ = Mode::Pwl;
                b0_ = f.params()[0];
                a0_ = f.params()[1];
                break;
            case FunctionKind::NegLinear:
                mode_ = Mode::Pwl;
                b0_ = -1.0;
                break;
            case FunctionKind::PiecewiseLinear: {
                mode_ = Mode::Pwl;
                const auto& p = f.params();
                const std::size_t nk = p.size() / 2;
                const double s0 = (p[3] - p[1]) / (p[2] - p[0]);
                b0_ = s0;
                a0_ = p[1] - s0 * p[0];
                double prev = s0;
                for (std::size_t kk = 1; kk + 1 < nk; ++kk) {
                    const double sk =
                        (p[2 * kk + 3] - p[2 * kk + 1]) / (p[2 * kk + 2] - p[2 * kk]);
                    knots_.push_back(p[2 * kk]);
                    jumps_.push_back(sk - prev);
                    prev = sk;
                }
                break;
            }
            case FunctionKind::Quadratic:
                mode_ = Mode::Quad;
                quad_q_ = f.params().empty() ? 1.0 : f.params()[0];
                break;
            case FunctionKind::ExpScaled:
                mode_ = Mode::Exp;
                exp_a_ = f.params()[0];
                exp_b_ = f.params()[1];
                break;
            default: mode_ = Mode::Numeric; break;
            }
        }
        smooth_ = h;
    }

    bool closed_form() const { return mode_ != Mode::Numeric; }

    double eval(double z, double delta) const {
        const double mean = z + rate_ * delta;
        const double var = s2_ * delta;
        double v = 0.0;
        switch (mode_) {
        case Mode::Pwl: {
            v = a0_ + b0_ * mean;
            const double w = std::sqrt(var + smooth_ * smooth_);
            for (std::size_t j = 0; j < knots_.size(); ++j) {
                const double u = mean - knots_[j];
                v += jumps_[j] * (w > 0.0 ? u * norm_cdf(u / w) + w * norm_pdf(u / w)
                                          : std::max(u, 0.0));
            }
            break;
        }
        case Mode::Quad: v = quad_q_ * (mean * mean + var + smooth_ * smooth_); break;
        case Mode::Exp:
            v = exp_a_ *
                std::exp(exp_b_ * mean + 0.5 * exp_b_ * exp_b_ * (var + smooth_ * smooth_));
            break;
        case Mode::Numeric:
            return normal_expectation([this](double y) { return f_(y); }, mean, var, 512);
        }
        if (bump_gamma_ != 0.0)
            v += bump_gamma_ *
                 (std::cosh(bump_alpha_ * mean) * std::exp(0.5 * bump_alpha_ * bump_alpha_ * var) -
                  1.0);
        return v;
    }

private:
    enum class Mode { Pwl, Quad, Exp, Numeric };
    Mode mode_ = Mode::Numeric;
    double rate_ = 0.0, s2_ = 0.0, smooth_ = 0.0;
    double a0_ = 0.0, b0_ = 0.0;
    std::vector<double> knots_, jumps_;
    double quad_q_ = 0.0, exp_a_ = 0.0, exp_b_ = 0.0;
    double bump_gamma_ = 0.0, bump_alpha_ = 0.0;
    ScalarFunction f_;
};

struct NodeCoeffs {
    // Generator coefficients per node: A = sigma sigma^T / 2 entries and drift.
    std::vector<double> d11, d22, d12, b1, b2;
    double lambda_max = 0.0;
    double drift_sum = 0.0; // sum over axes of max |b_i|
};

NodeCoeffs precompute_coeffs(const DiffusionModel& model, const GridSpec& g) {
    NodeCoeffs c;
    const int n = g.nodes_per_axis;
    const std::size_t total = g.dim == 1 ? n : static_cast<std::size_t>(n) * n;
    c.d11.resize(total);
    c.b1.resize(total);
    if (g.dim == 2) {
        c.d22.resize(total);
        c.d12.resize(total);
        c.b2.resize(total);
    }
    const double h = 2.0 * g.radius / (n - 1);
    Vec x(g.dim), b(g.dim);
    double max_b1 = 0.0, max_b2 = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const int i = static_cast<int>(idx % n);
        const int j = static_cast<int>(idx / n);
        x[0] = -g.radius + i * h;
        if (g.dim == 2) x[1] = -g.radius + j * h;
        const model::Mat a = 0.5 * model.diffusion_matrix(x);
        model.drift_into(x, b);
        c.d11[idx] = a(0, 0);
        c.b1[idx] = b[0];
        max_b1 = std::max(max_b1, std::abs(b[0]));
        double lam = a(0, 0);
        if (g.dim == 2) {
            c.d22[idx] = a(1, 1);
            c.d12[idx] = a(0, 1);
            c.b2[idx] = b[1];
            max_b2 = std::max(max_b2, std::abs(b[1]));
            Eigen::SelfAdjointEigenSolver<model::Mat> es(a);
            lam = es.eigenvalues().maxCoeff();
        }
        c.lambda_max = std::max(c.lambda_max, lam);
    }
    c.drift_sum = max_b1 + max_b2;
    return c;
}

void update_interior_1d(const double* cur, double* nxt, const NodeCoeffs& c, int n, double h,
                        double dt) {
    const double ih2 = 1.0 / (h * h);
    const double i2h = 0.5 / h;
    for (int i = 1; i + 1 < n; ++i) {
        const double lap = c.d11[i] * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) * ih2;
        const double adv = c.b1[i] * (cur[i + 1] - cur[i - 1]) * i2h;
        nxt[i] = cur[i] + dt * (lap + adv);
    }
}

void update_rows_2d(const double* cur, double* nxt, const NodeCoeffs& c, int n, double h,
                    double dt, int j_first, int j_last) {
    const double ih2 = 1.0 / (h * h);
    const double i4h2 = 0.25 * ih2;
    const double i2h = 0.5 / h;
    for (int j = j_first; j < j_last; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n;
        for (int i = 1; i + 1 < n; ++i) {
            const std::size_t idx = row + i;
            const double u = cur[idx];
            const double ue = cur[idx + 1], uw = cur[idx - 1];
            const double un = cur[idx + n], us = cur[idx - n];
            const double une = cur[idx + n + 1], unw = cur[idx + n - 1];
            const double use_ = cur[idx - n + 1], usw = cur[idx - n - 1];
            const double lap = c.d11[idx] * (ue - 2.0 * u + uw) * ih2 +
                               c.d22[idx] * (un - 2.0 * u + us) * ih2 +
                               2.0 * c.d12[idx] * (une - unw - use_ + usw) * i4h2;
            const double adv = c.b1[idx] * (ue - uw) * i2h + c.b2[idx] * (un - us) * i2h;
            nxt[idx] = u + dt * (lap + adv);
        }
    }
}

} // namespace

double ValueField::node_coord(int index) const {
    return -grid.radius + index * (2.0 * grid.radius / (grid.nodes_per_axis - 1));
}

ValueField solve_backward(const DiffusionModel& model, const convex::PayoffSpec& payoff,
                          const GridSpec& grid, BoundaryPolicy policy, int threads) {
    if (grid.dim != 1 && grid.dim != 2)
        throw SpecError("grid solver supports one or two dimensions");
    if (grid.dim != model.dim) throw SpecError("grid dimension must match the model");
    if (payoff.weights.size() != model.dim)
        throw SpecError("payoff weight length must match the model dimension");
    if (grid.nodes_per_axis < 5 || !(grid.radius > 0.0) || !(grid.horizon > 0.0))
        throw SpecError("grid needs >= 5 nodes per axis, positive radius and horizon");
    if (policy == BoundaryPolicy::ExactGaussian && !model.constant_coefficients())
        throw SpecError("exact boundary values need constant coefficients; use frozen data");

    const int n = grid.nodes_per_axis;
    const double h = 2.0 * grid.radius / (n - 1);
    const NodeCoeffs coeffs = precompute_coeffs(model, grid);
    if (coeffs.lambda_max <= 0.0)
        throw NumericError("degenerate diffusion on the grid; the march would not diffuse");

    const double denom = 2.0 * grid.dim * coeffs.lambda_max / (h * h) + coeffs.drift_sum / h;
    const double dt_stable = 0.8 / denom;
    const int steps = std::max({grid.time_steps,
                                static_cast<int>(std::ceil(grid.horizon / dt_stable)), 1});
    const double dt = grid.horizon / steps;

    const std::size_t total = grid.dim == 1 ? n : static_cast<std::size_t>(n) * n;

    // Terminal data f(<c, x>) everywhere, including the boundary.
    std::vector<double> buf_a(total), buf_b(total);
    const Vec& c = payoff.weights;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const int i = static_cast<int>(idx % n);
        const int j = static_cast<int>(idx / n);
        double z = c[0] * (-grid.radius + i * h);
        if (grid.dim == 2) z += c[1] * (-grid.radius + j * h);
        buf_a[idx] = payoff.f(z);
    }
    buf_b = buf_a; // boundary entries of both buffers start at terminal data

    // Boundary bookkeeping for the exact policy.
    std::vector<std::size_t> boundary_idx;
    std::vector<double> boundary_z;
    double max_boundary_z = 0.0;
    if (policy == BoundaryPolicy::ExactGaussian) {
        for (std::size_t idx = 0; idx < total; ++idx) {
            const int i = static_cast<int>(idx % n);
            const int j = static_cast<int>(idx / n);
            const bool edge =
                i == 0 || i == n - 1 || (grid.dim == 2 && (j == 0 || j == n - 1));
            if (!edge) continue;
            double z = c[0] * (-grid.radius + i * h);
            if (grid.dim == 2) z += c[1] * (-grid.radius + j * h);
            boundary_idx.push_back(idx);
            boundary_z.push_back(z);
            max_boundary_z = std::max(max_boundary_z, std::abs(z));
        }
    }

    GaussianBridge bridge =
        policy == BoundaryPolicy::ExactGaussian
            ? GaussianBridge(payoff, model, grid.horizon, max_boundary_z)
            : GaussianBridge(payoff, model, 0.0, 0.0);
    if (policy == BoundaryPolicy::ExactGaussian && grid.dim == 2 && !bridge.closed_form())
        throw SpecError("this payoff family needs quadrature boundary values, which are only "
                        "supported in one dimension; use frozen data");

    double* cur = buf_a.data();
    double* nxt = buf_b.data();

    const auto fill_boundary = [&](double* buf, int level) {
        if (policy != BoundaryPolicy::ExactGaussian) return;
        const double delta = (static_cast<double>(steps) - level) * dt;
        for (std::size_t k = 0; k < boundary_idx.size(); ++k)
            buf[boundary_idx[k]] = bridge.eval(boundary_z[k], delta);
    };

    int nthreads = threads > 0 ? threads
                               : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::clamp(nthreads, 1, 16);
    const bool threaded = grid.dim == 2 && nthreads > 1 &&
                          static_cast<double>(total) * steps > 5e7;

    if (!threaded) {
        for (int m = steps - 1; m >= 0; --m) {
            if (grid.dim == 1)
                update_interior_1d(cur, nxt, coeffs, n, h, dt);
            else
                update_rows_2d(cur, nxt, coeffs, n, h, dt, 1, n - 1);
            fill_boundary(nxt, m);
            std::swap(cur, nxt);
        }
    } else {
        int m = steps - 1;
        std::barrier sync(nthreads, [&]() noexcept {
            fill_boundary(nxt, m);
            std::swap(cur, nxt);
            --m;
        });
        std::vector<std::thread> pool;
        const int rows = n - 2;
        const int block = (rows + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const int j_first = 1 + t * block;
            const int j_last = std::min(1 + (t + 1) * block, n - 1);
            pool.emplace_back([&, j_first, j_last] {
                while (m >= 0) {
                    if (j_first < j_last)
                        update_rows_2d(cur, nxt, coeffs, n, h, dt, j_first, j_last);
                    sync.arrive_and_wait();
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    ValueField field;
    field.grid = grid;
    field.grid.time_steps = steps;
    field.dt_used = dt;
    field.steps_taken = steps;
    field.values.assign(cur, cur + total);

    for (double v : field.values)
        if (!std::isfinite(v))
            throw NumericError("grid march produced non-finite values; the time step rule "
                               "failed for this model");
    return field;
}

double probe_value(const ValueField& field, const Vec& point) {
    const GridSpec& g = field.grid;
    if (point.size() != g.dim) throw SpecError("probe point has the wrong dimension");
    const int n = g.nodes_per_axis;
    const double h = 2.0 * g.radius / (n - 1);
    int cell[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int k = 0; k < g.dim; ++k) {
        if (std::abs(point[k]) > g.radius + 1e-12)
            throw SpecError("probe point lies outside the grid");
        const double t = std::clamp((point[k] + g.radius) / h, 0.0, static_cast<double>(n - 1));
        cell[k] = std::min(static_cast<int>(t), n - 2);
        frac[k] = t - cell[k];
    }
    if (g.dim == 1) {
        return (1.0 - frac[0]) * field.at(cell[0]) + frac[0] * field.at(cell[0] + 1);
    }
    const double v00 = field.at(cell[0], cell[1]);
    const double v10 = field.at(cell[0] + 1, cell[1]);
    const double v01 = field.at(cell[0], cell[1] + 1);
    const double v11 = field.at(cell[0] + 1, cell[1] + 1);
    return (1.0 - frac[0]) * (1.0 - frac[1]) * v00 + frac[0] * (1.0 - frac[1]) * v10 +
           (1.0 - frac[0]) * frac[1] * v01 + frac[0] * frac[1] * v11;
}

PropagationReport propagation_report(const ValueField& field, double core_radius) {
    const GridSpec& g = field.grid;
    PropagationReport rep;
    rep.dim = g.dim;
    rep.core_radius = core_radius > 0.0 ? core_radius : 0.5 * g.radius;
    const int n = g.nodes_per_axis;
    const double h = 2.0 * g.radius / (n - 1);
    const double ih2 = 1.0 / (h * h);
    const double i2h = 0.5 / h;

    double min_sd = std::numeric_limits<double>::infinity();
    double min_eig = min_sd, min_tr = min_sd, min_gr = min_sd;

    const auto in_core = [&](int i) {
        return std::abs(-g.radius + i * h) <= rep.core_radius + 1e-12;
    };

    if (g.dim == 1) {
        for (int i = 1; i + 1 < n; ++i) {
            if (!in_core(i)) continue;
            const double sd = (field.at(i + 1) - 2.0 * field.at(i) + field.at(i - 1)) * ih2;
            const double gr = (field.at(i + 1) - field.at(i - 1)) * i2h;
            min_sd = std::min(min_sd, sd);
            min_gr = std::min(min_gr, gr);
        }
        min_eig = min_sd;
        min_tr = min_sd;
    } else {
        for (int j = 1; j + 1 < n; ++j) {
            if (!in_core(j)) continue;
            for (int i = 1; i + 1 < n; ++i) {
                if (!in_core(i)) continue;
                const double hxx =
                    (field.at(i + 1, j) - 2.0 * field.at(i, j) + field.at(i - 1, j)) * ih2;
                const double hyy =
                    (field.at(i, j + 1) - 2.0 * field.at(i, j) + field.at(i, j - 1)) * ih2;
                const double hxy = (field.at(i + 1, j + 1) - field.at(i + 1, j - 1) -
                                    field.at(i - 1, j + 1) + field.at(i - 1, j - 1)) *
                                   0.25 * ih2;
                const double mid = 0.5 * (hxx + hyy);
                const double rad = std::sqrt(0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy);
                min_sd = std::min({min_sd, hxx, hyy});
                min_eig = std::min(min_eig, mid - rad);
                min_tr = std::min(min_tr, hxx + hyy);
                const double gx = (field.at(i + 1, j) - field.at(i - 1, j)) * i2h;
                const double gy = (field.at(i, j + 1) - field.at(i, j - 1)) * i2h;
                min_gr = std::min({min_gr, gx, gy});
            }
        }
    }
    rep.min_second_diff = min_sd;
    rep.min_hessian_eig = min_eig;
    rep.min_trace = min_tr;
    rep.min_gradient = min_gr;
    return rep;
}

DeltaField delta_field(const ValueField& field_x, const ValueField& field_y, double core_radius) {
    const GridSpec& g = field_x.grid;
    if (field_y.grid.dim != g.dim || field_y.grid.nodes_per_axis != g.nodes_per_axis ||
        field_y.grid.radius != g.radius)
        throw SpecError("gap field needs both solutions on the same grid");
    DeltaField d;
    d.grid = g;
    d.values.resize(field_x.values.size());
    const double core = core_radius > 0.0 ? core_radius : 0.5 * g.radius;
    const int n = g.nodes_per_axis;
    const double h = 2.0 * g.radius / (n - 1);
    double core_min = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < d.values.size(); ++idx) {
        d.values[idx] = field_y.values[idx] - field_x.values[idx];
        const int i = static_cast<int>(idx % n);
        const int j = static_cast<int>(idx / n);
        bool inside = std::abs(-g.radius + i * h) <= core + 1e-12;
        if (g.dim == 2) inside = inside && std::abs(-g.radius + j * h) <= core + 1e-12;
        if (inside) core_min = std::min(core_min, d.values[idx]);
    }
    d.core_min = core_min;
    return d;
}

void dump_csv(const ValueField& field, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw SpecError("cannot open csv file for writing: " + path);
    const int n = field.grid.nodes_per_axis;
    if (field.grid.dim == 1) {
        std::fprintf(f, "x,value\n");
        for (int i = 0; i < n; ++i)
            std::fprintf(f, "%.17g,%.17g\n", field.node_coord(i), field.at(i));
    } else {
        std::fprintf(f, "x,y,value\n");
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                std::fprintf(f, "%.17g,%.17g,%.17g\n", field.node_coord(i), field.node_coord(j),
                             field.at(i, j));
    }
    std::fclose(f);
}

} // namespace diffcomp::pde
