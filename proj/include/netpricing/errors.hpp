#ifndef NETPRICING_ERRORS_HPP
#define NETPRICING_ERRORS_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace netpricing {

/// Linear system was singular or numerically unusable.
class SingularSystemError : public std::runtime_error {
public:
    explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// A solve required rho(GD) < 1 and the input violated it.
class SpectralConditionError : public std::runtime_error {
public:
    SpectralConditionError(const std::string& what, double radius)
        : std::runtime_error(what), radius(radius) {}
    double radius;
};

/// Fixed-point iteration hit its iteration budget before reaching tolerance.
class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& what, Eigen::VectorXd last, double residual)
        : std::runtime_error(what), last_iterate(std::move(last)), residual(residual) {}
    Eigen::VectorXd last_iterate;
    double residual;
};

/// Q - G failed the positive-definiteness requirement of the ratio bounds.
class NotPositiveDefiniteError : public std::runtime_error {
public:
    NotPositiveDefiniteError(const std::string& what, double min_eigenvalue)
        : std::runtime_error(what), min_eigenvalue(min_eigenvalue) {}
    double min_eigenvalue;
};

} // namespace netpricing

#endif
