#pragma once

#include <stdexcept>
#include <string>

namespace diffcomp {

// Malformed configuration or a violated call contract (bad dimensions,
// unparseable scenario files, out-of-domain probes).
class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// A declared hypothesis failed a numerical probe. The message carries the
// witnessing configuration so the caller can reproduce the failure.
class HypothesisViolation : public std::runtime_error {
public:
    explicit HypothesisViolation(const std::string& what) : std::runtime_error(what) {}
};

// Smoothing parameters could not be tuned to meet the requested accuracy.
class MollificationError : public std::runtime_error {
public:
    explicit MollificationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown at run time: diverged sample paths, unreachable
// stability constraints, degenerate diffusion where positivity is required.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace diffcomp
