#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace affgebroid {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch or malformed argument.
class InputError : public Error {
public:
    using Error::Error;
};

/// A field evaluation produced a non-finite value or derivative.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Singular W, flat map or compatibility matrix.
class RegularityError : public Error {
public:
    using Error::Error;
};

/// Newton inversion of the Legendre map did not converge.
class HyperregularityError : public Error {
public:
    using Error::Error;
};

/// Expression or configuration text could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// The integrator met a non-finite derivative. Carries the last good state.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time, Eigen::VectorXd state)
        : Error(what), time_(time), state_(std::move(state)) {}
    double last_time() const { return time_; }
    const Eigen::VectorXd& last_state() const { return state_; }

private:
    double time_;
    Eigen::VectorXd state_;
};

}  // namespace affgebroid
