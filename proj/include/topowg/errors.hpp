#pragma once

#include <stdexcept>
#include <string>

namespace topowg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (bad N, |delta| >= 1, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The emitter frequency is not inside the middle band gap (|g| >= 2|delta|).
class OutOfGapError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// g == 0: the emitter is decoupled and the bound-state pair is undefined.
class DegenerateCouplingError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// The spectrum does not carry the expected number of in-gap states.
class TopologyError : public ParameterError {
public:
    TopologyError(const std::string& what, int expected, int found)
        : ParameterError(what), expected_(expected), found_(found) {}

    int expected() const noexcept { return expected_; }
    int found() const noexcept { return found_; }

private:
    int expected_;
    int found_;
};

/// Eigensolver non-convergence, integrator failure, posterior underflow.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace topowg
