#pragma once

#include <stdexcept>
#include <string>

namespace driftlab {

/// Thrown when a fixed-point solve exhausts its iteration budget.
/// Usually means the step size is too large for the iteration to contract.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual(residual), iterations(iterations) {}

    NonConvergenceError(const std::string& what, double residual, int iterations,
                        long sample, long step)
        : std::runtime_error(what), residual(residual), iterations(iterations),
          sample(sample), step(step) {}

    double residual = 0.0;
    int iterations = 0;
    // Filled in by the Monte Carlo harness when the failure happened inside a run.
    long sample = -1;
    long step = -1;
};

enum class ConfigErrorKind { UnknownKey, MissingRequired, DimensionMismatch };

/// Configuration rejected; `key` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(ConfigErrorKind kind, std::string key, const std::string& what)
        : std::runtime_error(what), kind(kind), key(std::move(key)) {}

    ConfigErrorKind kind;
    std::string key;
};

/// File I/O failure with the path attached.
class IoError : public std::runtime_error {
public:
    IoError(std::string path, const std::string& what)
        : std::runtime_error(what), path(std::move(path)) {}

    std::string path;
};

} // namespace driftlab
