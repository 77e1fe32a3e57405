#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace projfilt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A coefficient or derivative evaluated to a non-finite value.
struct EvaluationError : Error {
  using Error::Error;
};

/// The chart Jacobian lost rank (condition number past the threshold).
struct DegenerateChartError : Error {
  using Error::Error;
};

/// Closest-point search failed: the point is not reachable by descent
/// from the given chart start, or sits where the projection degenerates.
struct OutsideTubularNeighborhoodError : Error {
  using Error::Error;
};

/// An integration step produced a non-finite state.
struct DivergenceError : Error {
  using Error::Error;
};

/// A parameter step left the family's domain (e.g. scale <= 0).
struct BoundaryError : Error {
  using Error::Error;
};

/// The metric of a density family failed to be positive definite.
struct DegenerateFamilyError : Error {
  using Error::Error;
};

/// A density handed to a coefficient routine was not normalized.
struct RenormalizationRequiredError : Error {
  using Error::Error;
};

/// The grid solver lost its density (mass collapse).
struct SolverFailureError : Error {
  using Error::Error;
};

/// Too much probability mass reached the grid boundary.
struct DomainTooSmallError : Error {
  using Error::Error;
};

/// Two grids that must share a layout do not.
struct ShapeError : Error {
  using Error::Error;
};

/// A Monte Carlo probe discarded too many trials to be trusted.
struct ProbeInvalidError : Error {
  using Error::Error;
};

/// Scenario configuration failed validation.
struct ConfigError : Error {
  using Error::Error;
};

inline bool all_finite(const VectorXd& v) { return v.allFinite(); }
inline bool all_finite(const MatrixXd& m) { return m.allFinite(); }

/// Least-squares slope of y against x.
inline double least_squares_slope(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Slope of log(y) vs log(x); inputs must be positive.
inline double log_log_slope(const std::vector<double>& x,
                            const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return least_squares_slope(lx, ly);
}

/// FNV-1a over raw bytes; used to fingerprint noise streams in CSV headers.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace projfilt
