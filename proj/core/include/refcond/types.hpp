#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace refcond {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Inconsistent matrix/vector sizes or invalid scalar arguments.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: non-PD Hessian, unstable closed loop, rank deficiency, infeasible QP.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration document.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw DimensionError(message);
}

} // namespace refcond
