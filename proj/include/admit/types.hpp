#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace admit {

using Vec = Eigen::VectorXd;

// Positivity (stability) constraint violated on admittance parameters.
struct StabilityError : std::domain_error {
  explicit StabilityError(const std::string& what) : std::domain_error(what) {}
};

// Mismatched dimensions between coupled sequences/vectors.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// NaN/Inf reached a numeric kernel.
struct NumericError : std::domain_error {
  explicit NumericError(const std::string& what) : std::domain_error(what) {}
};

// Bad configuration (unknown task tag, missing file, invalid schema...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace admit
