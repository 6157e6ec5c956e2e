#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffcomp/model.hpp"
#include "diffcomp/payoff.hpp"

namespace diffcomp::sde {

using model::DiffusionModel;
using Vec = Eigen::VectorXd;

// One Monte Carlo run: Euler-Maruyama with `steps` uniform time steps over
// [0, horizon], `paths` independent paths, all randomness derived from
// (seed, path, step, coordinate) counters so results are reproducible and
// independent of scheduling.
struct SimPlan {
    double horizon = 1.0;
    int steps = 64;
    std::int64_t paths = 10000;
    std::uint64_t seed = 1;
};

struct PairedSample {
    double payoff_x = 0.0;
    double payoff_y = 0.0;
};

struct SimResult {
    std::vector<PairedSample> samples; // slot p belongs to path p
    std::vector<std::uint8_t> flags;   // 1 when the path went non-finite
    std::int64_t flagged = 0;
};

enum class Series { PayoffX, PayoffY, Diff };

struct MCEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t count = 0;
};

// Drives both models with the same Brownian increments (the coupling that
// makes the difference estimator tight). Requires equal state and noise
// dimensions. Throws NumericError when more than max(1, paths/10^4) paths
// go non-finite; isolated bad paths are flagged and excluded from estimates.
SimResult simulate_pair(const DiffusionModel& model_x, const DiffusionModel& model_y,
                        const convex::PayoffSpec& payoff_x, const convex::PayoffSpec& payoff_y,
                        const SimPlan& plan, int threads = 0);

// Deterministic reduction: fixed-shape pairwise summation with compensated
// leaves, identical for every thread count.
MCEstimate estimate(const SimResult& result, Series series);

// Scalar reference problems with closed-form strong solutions, used to
// check the integrator's convergence order.
enum class ProbeKind {
    ArithmeticBM, // dX = a dt + b dW        (Euler is exact)
    GeometricBM,  // dX = a X dt + b X dW
};

struct ProbeModel {
    ProbeKind kind = ProbeKind::GeometricBM;
    double a = 0.1;
    double b = 0.2;
    double x0 = 1.0;
    double horizon = 1.0;
};

struct ProbePoint {
    int steps = 0;
    double dt = 0.0;
    double strong_error = 0.0; // E |X^h_T - X_T|, same path
    double weak_error = 0.0;   // |E [X^h_T - X_T]|, coupled estimator
};

struct ProbeResult {
    std::vector<ProbePoint> points;
    double strong_slope = 0.0; // log-log regression of strong error vs dt
    double weak_slope = 0.0;
    double max_strong_error = 0.0;
};

ProbeResult strong_error_probe(const ProbeModel& model, const std::vector<int>& step_ladder,
                               std::int64_t paths, std::uint64_t seed);

// Binary little-endian dump of per-path payoffs: 8-byte magic, u64 count,
// then (u64 path index, f64 payoff_x, f64 payoff_y) records.
void write_samples(const std::string& path, const SimResult& result);
SimResult read_samples(const std::string& path);

} // namespace diffcomp::sde
