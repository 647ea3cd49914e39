#pragma once

#include <stdexcept>
#include <string>

namespace terrain {

// Rejected inputs: bad arguments, infeasible configurations, malformed data.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A linear solve finished but the residual stayed above tolerance.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, double max_residual)
        : std::runtime_error(what), max_residual_(max_residual) {}

    double max_residual() const { return max_residual_; }

private:
    double max_residual_ = 0.0;
};

// Quadrature, fitting or clock problems that are not caused by bad input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File system and format failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace terrain
