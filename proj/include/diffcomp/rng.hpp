#pragma once

#include <cmath>
#include <cstdint>

namespace diffcomp::sde {

// Counter-based normal generator. Every draw is a pure function of
// (seed, path, step, coordinate), so simulation results do not depend on
// thread count or evaluation order, and any single increment can be
// regenerated in isolation.

// 64-bit avalanche mixer (splitmix64 finalizer).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path,
                                            std::uint64_t step, std::uint64_t coord) noexcept {
    // Chained mixing keeps full avalanche between any two distinct keys.
    std::uint64_t h = mix64(coord ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ step);
    h = mix64(h ^ path);
    h = mix64(h ^ seed);
    return h;
}

// Map 52 high bits to the open interval (0, 1); the extremes are 2^-53 and
// 1 - 2^-53, both exactly representable, so the inverse CDF below never sees
// 0 or 1. (A 53-bit ladder would round its top value 1 - 2^-54 up to 1.)
inline double uniform01(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 12) * 0x1.0p-52 + 0x1.0p-53;
}

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step through erfc, giving close to full double accuracy.
double inverse_normal_cdf(double p);

inline double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                          std::uint64_t coord) {
    return inverse_normal_cdf(uniform01(counter_hash(seed, path, step, coord)));
}

// Fill out[0..dim) with independent N(0,1) variates for one (path, step).
// Scaling by sqrt(dt) is the caller's responsibility.
inline void brownian_increment(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                               int dim, double* out) {
    for (int c = 0; c < dim; ++c)
        out[c] = normal_draw(seed, path, step, static_cast<std::uint64_t>(c));
}

} // namespace diffcomp::sde
