#include "diffcomp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <thread>

#include "diffcomp/errors.hpp"
#include "diffcomp/rng.hpp"

namespace diffcomp::sde {

namespace {

// Compensated (Neumaier) sum for short runs, pairwise recursion above. The
// split points depend only on the length, so the result is bitwise stable.
double stable_sum(const double* v, std::size_t n) {
    if (n <= 32) {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = s + v[i];
            c += std::abs(s) >= std::abs(v[i]) ? (s - t) + v[i] : (v[i] - t) + s;
            s = t;
        }
        return s + c;
    }
    const std::size_t half = n / 2;
    return stable_sum(v, half) + stable_sum(v + half, n - half);
}

void run_path_block(const DiffusionModel& mx, const DiffusionModel& my,
                    const convex::PayoffSpec& px, const convex::PayoffSpec& py,
                    const SimPlan& plan, std::int64_t first, std::int64_t last,
                    SimResult& out) {
    const int dim = mx.dim;
    const int noise_dim = mx.dispersion.cols();
    const double dt = plan.horizon / plan.steps;
    const double sqrt_dt = std::sqrt(dt);

    Vec x(dim), y(dim), bx(dim), by(dim), xi(noise_dim);
    model::Mat sx(dim, noise_dim), sy(dim, noise_dim);

    for (std::int64_t p = first; p < last; ++p) {
        x = mx.x0;
        y = my.x0;
        bool bad = false;
        for (int n = 0; n < plan.steps && !bad; ++n) {
            brownian_increment(plan.seed, static_cast<std::uint64_t>(p),
                               static_cast<std::uint64_t>(n), noise_dim, xi.data());
            mx.drift_into(x, bx);
            mx.dispersion_into(x, sx);
            my.drift_into(y, by);
            my.dispersion_into(y, sy);
            x += bx * dt + sx * (sqrt_dt * xi);
            y += by * dt + sy * (sqrt_dt * xi);
            bad = !x.allFinite() || !y.allFinite();
        }
        double vx = bad ? std::numeric_limits<double>::quiet_NaN() : convex::eval_payoff(px, x);
        double vy = bad ? std::numeric_limits<double>::quiet_NaN() : convex::eval_payoff(py, y);
        if (!std::isfinite(vx) || !std::isfinite(vy)) {
            out.flags[static_cast<std::size_t>(p)] = 1;
            vx = vy = 0.0;
        }
        out.samples[static_cast<std::size_t>(p)] = {vx, vy};
    }
}

} // namespace

SimResult simulate_pair(const DiffusionModel& model_x, const DiffusionModel& model_y,
                        const convex::PayoffSpec& payoff_x, const convex::PayoffSpec& payoff_y,
                        const SimPlan& plan, int threads) {
    if (model_x.dim != model_y.dim)
        throw SpecError("coupled simulation needs equal state dimensions");
    if (model_x.dispersion.cols() != model_y.dispersion.cols())
        throw SpecError("coupled simulation needs equal noise dimensions");
    if (payoff_x.weights.size() != model_x.dim || payoff_y.weights.size() != model_y.dim)
        throw SpecError("payoff weight length must match the state dimension");
    if (plan.steps <= 0 || plan.paths <= 0 || !(plan.horizon > 0.0))
        throw SpecError("simulation plan needs positive horizon, steps and paths");

    SimResult result;
    result.samples.resize(static_cast<std::size_t>(plan.paths));
    result.flags.assign(static_cast<std::size_t>(plan.paths), 0);

    int nthreads = threads > 0 ? threads
                               : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::clamp(nthreads, 1, 64);
    nthreads = static_cast<int>(std::min<std::int64_t>(nthreads, plan.paths));

    if (nthreads == 1) {
        run_path_block(model_x, model_y, payoff_x, payoff_y, plan, 0, plan.paths, result);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        const std::int64_t block = (plan.paths + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const std::int64_t first = t * block;
            const std::int64_t last = std::min<std::int64_t>(first + block, plan.paths);
            if (first >= last) break;
            pool.emplace_back([&, first, last] {
                run_path_block(model_x, model_y, payoff_x, payoff_y, plan, first, last, result);
            });
        }
        for (auto& th : pool) th.join();
    }

    result.flagged = 0;
    for (auto f : result.flags) result.flagged += f;
    const std::int64_t budget = std::max<std::int64_t>(1, plan.paths / 10000);
    if (result.flagged > budget)
        throw NumericError("simulation produced " + std::to_string(result.flagged) +
                           " non-finite paths out of " + std::to_string(plan.paths));
    return result;
}

MCEstimate estimate(const SimResult& result, Series series) {
    std::vector<double> values;
    values.reserve(result.samples.size());
    for (std::size_t p = 0; p < result.samples.size(); ++p) {
        if (result.flags[p]) continue;
        const PairedSample& s = result.samples[p];
        switch (series) {
        case Series::PayoffX: values.push_back(s.payoff_x); break;
        case Series::PayoffY: values.push_back(s.payoff_y); break;
        case Series::Diff: values.push_back(s.payoff_y - s.payoff_x); break;
        }
    }
    MCEstimate est;
    est.count = static_cast<std::int64_t>(values.size());
    if (est.count == 0) throw NumericError("no usable paths to estimate from");
    est.mean = stable_sum(values.data(), values.size()) / static_cast<double>(est.count);
    if (est.count >= 2) {
        for (double& v : values) {
            const double d = v - est.mean;
            v = d * d;
        }
        const double var =
            stable_sum(values.data(), values.size()) / static_cast<double>(est.count - 1);
        est.se = std::sqrt(std::max(var, 0.0) / static_cast<double>(est.count));
    }
    return est;
}

ProbeResult strong_error_probe(const ProbeModel& model, const std::vector<int>& step_ladder,
                               std::int64_t paths, std::uint64_t seed) {
    if (step_ladder.empty() || paths <= 0)
        throw SpecError("probe needs a step ladder and positive path count");
    ProbeResult out;
    for (int steps : step_ladder) {
        const double dt = model.horizon / steps;
        const double sqrt_dt = std::sqrt(dt);
        std::vector<double> abs_err(static_cast<std::size_t>(paths));
        std::vector<double> signed_err(static_cast<std::size_t>(paths));
        for (std::int64_t p = 0; p < paths; ++p) {
            double x = model.x0;
            double w = 0.0;
            for (int n = 0; n < steps; ++n) {
                const double dw =
                    sqrt_dt * normal_draw(seed, static_cast<std::uint64_t>(p),
                                          static_cast<std::uint64_t>(n), 0);
                switch (model.kind) {
                case ProbeKind::ArithmeticBM: x += model.a * dt + model.b * dw; break;
                case ProbeKind::GeometricBM: x += model.a * x * dt + model.b * x * dw; break;
                }
                w += dw;
            }
            double exact = 0.0;
            switch (model.kind) {
            case ProbeKind::ArithmeticBM:
                exact = model.x0 + model.a * model.horizon + model.b * w;
                break;
            case ProbeKind::GeometricBM:
                exact = model.x0 * std::exp((model.a - 0.5 * model.b * model.b) * model.horizon +
                                            model.b * w);
                break;
            }
            abs_err[static_cast<std::size_t>(p)] = std::abs(x - exact);
            signed_err[static_cast<std::size_t>(p)] = x - exact;
        }
        ProbePoint pt;
        pt.steps = steps;
        pt.dt = dt;
        pt.strong_error = stable_sum(abs_err.data(), abs_err.size()) / static_cast<double>(paths);
        pt.weak_error =
            std::abs(stable_sum(signed_err.data(), signed_err.size()) / static_cast<double>(paths));
        out.max_strong_error = std::max(out.max_strong_error, pt.strong_error);
        out.points.push_back(pt);
    }

    // Least-squares slope of log error against log dt; flat for exact schemes.
    const auto slope = [&](auto pick) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (const ProbePoint& pt : out.points) {
            const double e = pick(pt);
            if (e <= 1e-14) continue;
            const double lx = std::log(pt.dt), ly = std::log(e);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++n;
        }
        if (n < 2) return 0.0;
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    out.strong_slope = slope([](const ProbePoint& p) { return p.strong_error; });
    out.weak_slope = slope([](const ProbePoint& p) { return p.weak_error; });
    return out;
}

namespace {
constexpr char kSampleMagic[8] = {'D', 'C', 'S', 'A', 'M', 'P', '0', '1'};

void put_u64(std::FILE* f, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    std::fwrite(b, 1, 8, f);
}

void put_f64(std::FILE* f, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(f, u);
}

std::uint64_t get_u64(std::FILE* f) {
    unsigned char b[8];
    if (std::fread(b, 1, 8, f) != 8) throw SpecError("truncated sample file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::FILE* f) {
    const std::uint64_t u = get_u64(f);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}
} // namespace

void write_samples(const std::string& path, const SimResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw SpecError("cannot open sample file for writing: " + path);
    std::fwrite(kSampleMagic, 1, 8, f);
    put_u64(f, result.samples.size());
    for (std::size_t p = 0; p < result.samples.size(); ++p) {
        put_u64(f, p);
        put_f64(f, result.samples[p].payoff_x);
        put_f64(f, result.samples[p].payoff_y);
    }
    std::fclose(f);
}

SimResult read_samples(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw SpecError("cannot open sample file: " + path);
    char magic[8];
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kSampleMagic, 8) != 0) {
        std::fclose(f);
        throw SpecError("not a sample file: " + path);
    }
    SimResult result;
    const std::uint64_t n = get_u64(f);
    result.samples.resize(n);
    result.flags.assign(n, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t p = get_u64(f);
        if (p >= n) {
            std::fclose(f);
            throw SpecError("sample file has an out-of-range path index");
        }
        result.samples[p].payoff_x = get_f64(f);
        result.samples[p].payoff_y = get_f64(f);
    }
    std::fclose(f);
    return result;
}

} // namespace diffcomp::sde
