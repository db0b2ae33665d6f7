#pragma once

#include <stdexcept>
#include <string>

namespace schauder {

/// Base for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A (generation, position) pair or level outside the stored range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Paths on different grids, or dimensions that cannot be contracted.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (non-finite samples, bad CSV/JSON, bad arguments).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Base for failures of a numerical procedure on valid input.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Covariance matrix not positive definite after jitter.
class FactorizationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Fixed-point map did not contract even after shrinking the window.
class NonContractionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Iteration budget exhausted before the residual fell below tolerance.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace schauder
