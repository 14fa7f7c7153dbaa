// errors.hpp -- exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace decolab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter or argument outside the valid domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Invariant violation in user-supplied data (configs, boundary data, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Evaluation requested too close to a focusing/anti-focusing divergence of
// the harmonic closed forms. Carries the nearest pole time to help sweeps.
struct PoleError : Error {
    double nearest_pole_time;
    PoleError(const std::string& msg, double nearest)
        : Error(msg), nearest_pole_time(nearest) {}
};

// The Gaussian propagation integral diverges (non positive definite form).
struct NonIntegrableError : Error {
    using Error::Error;
};

// Newton stagnated while solving the boundary-value problem.
struct StiffnessError : Error {
    double last_residual;
    StiffnessError(const std::string& msg, double residual)
        : Error(msg), last_residual(residual) {}
};

// A continuation/solve gave up after maximum refinement.
struct NonConvergenceError : Error {
    using Error::Error;
};

// A quadrature failed to reach the requested tolerance.
struct QuadratureError : Error {
    using Error::Error;
};

// Tabulated data queried outside its range.
struct ExtrapolationError : Error {
    using Error::Error;
};

// Malformed configuration text.
struct ParseError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace decolab
