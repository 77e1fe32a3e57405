#pragma once

#include <functional>

#include "projfilt/density_family.hpp"
#include "projfilt/quadrature.hpp"

namespace projfilt {

/// Which L^2 realization of the family is in play: densities themselves
/// (direct) or their square roots (hellinger).
enum class MetricMode { direct, hellinger };

/// Metric data of the family embedding at a parameter point, with tangent
/// and second-derivative functions of the embedded element.
struct FamilyGeometry {
  MetricMode mode = MetricMode::direct;
  VectorXd theta;
  MatrixXd metric;
  MatrixXd metric_inverse;
  std::function<double(double)> element;              // p or sqrt(p) at x
  std::function<VectorXd(double)> tangents;           // d element / d theta_i
  std::function<MatrixXd(double)> second_tangents;    // second theta derivatives
  std::function<VectorXd(double)> dual_basis;         // metric_inverse * tangents
};

/// Expectation of f under p_theta by recentered Gauss-Hermite quadrature.
double expectation(const DensityFamily& family, const VectorXd& theta,
                   const std::function<double(double)>& f,
                   const GaussHermiteRule& rule);

/// L^2 inner product of two fields that each carry one factor of the
/// family element (so the product decays like p in hellinger mode and like
/// p^2 in direct mode); the quadrature is recentered accordingly.
double family_inner_product(const DensityFamily& family, const VectorXd& theta,
                            MetricMode mode,
                            const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const GaussHermiteRule& rule);

/// Assembles the pullback metric, its inverse and the tangent functions.
/// Throws DegenerateFamilyError when the metric is not positive definite.
FamilyGeometry family_metric(const DensityFamily& family, const VectorXd& theta,
                             MetricMode mode, const GaussHermiteRule& rule);

}  // namespace projfilt
