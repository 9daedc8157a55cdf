#pragma once

#include <stdexcept>
#include <string>

namespace spme {

// Invalid configuration or input data. Maps to CLI exit status 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Two fields defined on different grids were combined.
class GridMismatch : public ConfigError {
public:
    GridMismatch() : ConfigError("fields live on different grids") {}
};

// The forcing g = sum c_k xi_k fails to exceed 1 at some node.
class NonDegeneracyViolation : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// A numerical procedure failed (Newton divergence, non-finite state). Exit status 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverDivergence : public NumericalError {
public:
    SolverDivergence(int iterations, double residual)
        : NumericalError("Newton iteration did not converge after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

}  // namespace spme
