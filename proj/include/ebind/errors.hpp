#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ebind {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// k on the k3-axis, where the polarization frame is undefined.
class AxisSingularity : public Error {
public:
    using Error::Error;
};

/// Iterative numerics that did not reach the requested tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_estimate, std::vector<double> trace = {})
        : Error(what), last_estimate_(last_estimate), trace_(std::move(trace)) {}

    double last_estimate() const noexcept { return last_estimate_; }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    double last_estimate_;
    std::vector<double> trace_;
};

/// No bound state / no binding for the requested parameters.
class NoBinding : public Error {
public:
    using Error::Error;
};

/// Root bracket could not be established.
class BracketError : public Error {
public:
    using Error::Error;
};

}  // namespace ebind
