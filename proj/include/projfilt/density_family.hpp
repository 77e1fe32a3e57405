#pragma once

#include "projfilt/common.hpp"

namespace projfilt {

/// Density value with its parameter gradient and Hessian.
struct ThetaDerivatives {
  double value = 0.0;
  VectorXd gradient;
  MatrixXd hessian;
};

/// Density value with its first two spatial derivatives.
struct SpatialDerivatives {
  double value = 0.0;
  double dx = 0.0;
  double dxx = 0.0;
};

/// Parametric family of scalar densities. Only the Gaussian family ships;
/// the interface is the seam for exponential or mixture families later.
class DensityFamily {
 public:
  virtual ~DensityFamily() = default;

  virtual int dim() const = 0;

  /// Throws BoundaryError when theta leaves the family's domain.
  virtual void validate(const VectorXd& theta) const = 0;

  virtual double density(const VectorXd& theta, double x) const = 0;
  virtual ThetaDerivatives theta_derivatives(const VectorXd& theta,
                                             double x) const = 0;
  virtual SpatialDerivatives spatial_derivatives(const VectorXd& theta,
                                                 double x) const = 0;

  /// Center and scale for recentering Gauss-Hermite rules.
  virtual double quadrature_center(const VectorXd& theta) const = 0;
  virtual double quadrature_scale(const VectorXd& theta) const = 0;
};

/// theta = (mean, standard deviation), second component positive.
class GaussianFamily final : public DensityFamily {
 public:
  int dim() const override { return 2; }
  void validate(const VectorXd& theta) const override;
  double density(const VectorXd& theta, double x) const override;
  ThetaDerivatives theta_derivatives(const VectorXd& theta,
                                     double x) const override;
  SpatialDerivatives spatial_derivatives(const VectorXd& theta,
                                         double x) const override;
  double quadrature_center(const VectorXd& theta) const override {
    return theta[0];
  }
  double quadrature_scale(const VectorXd& theta) const override {
    return theta[1];
  }
};

double sqrt_density(const DensityFamily& family, const VectorXd& theta,
                    double x);

/// Gradient and Hessian of sqrt(p) in theta via the chain rule from the
/// density derivatives.
ThetaDerivatives sqrt_theta_derivatives(const ThetaDerivatives& d);

}  // namespace projfilt
