#include "projfilt/density_family.hpp"

#include <cmath>
#include <sstream>

namespace projfilt {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}

void GaussianFamily::validate(const VectorXd& theta) const {
  if (theta.size() != 2) throw ShapeError("Gaussian family expects 2 parameters");
  if (!(theta[1] > 0.0) || !theta.allFinite()) {
    std::ostringstream msg;
    msg << "Gaussian parameter outside the family: theta = ["
        << theta.transpose() << "]";
    throw BoundaryError(msg.str());
  }
}

double GaussianFamily::density(const VectorXd& theta, double x) const {
  validate(theta);
  const double s = theta[1];
  const double u = (x - theta[0]) / s;
  return kInvSqrt2Pi / s * std::exp(-0.5 * u * u);
}

ThetaDerivatives GaussianFamily::theta_derivatives(const VectorXd& theta,
                                                   double x) const {
  validate(theta);
  const double s = theta[1];
  const double u = (x - theta[0]) / s;
  const double p = kInvSqrt2Pi / s * std::exp(-0.5 * u * u);
  const double u2 = u * u;

  ThetaDerivatives d;
  d.value = p;
  d.gradient.resize(2);
  d.gradient << p * u / s, p * (u2 - 1.0) / s;
  d.hessian.resize(2, 2);
  const double s2 = s * s;
  d.hessian(0, 0) = p * (u2 - 1.0) / s2;
  d.hessian(0, 1) = p * u * (u2 - 3.0) / s2;
  d.hessian(1, 0) = d.hessian(0, 1);
  d.hessian(1, 1) = p * (u2 * u2 - 5.0 * u2 + 2.0) / s2;
  return d;
}

SpatialDerivatives GaussianFamily::spatial_derivatives(const VectorXd& theta,
                                                       double x) const {
  validate(theta);
  const double s = theta[1];
  const double u = (x - theta[0]) / s;
  const double p = kInvSqrt2Pi / s * std::exp(-0.5 * u * u);
  SpatialDerivatives d;
  d.value = p;
  d.dx = -u / s * p;
  d.dxx = (u * u - 1.0) / (s * s) * p;
  return d;
}

double sqrt_density(const DensityFamily& family, const VectorXd& theta,
                    double x) {
  return std::sqrt(family.density(theta, x));
}

ThetaDerivatives sqrt_theta_derivatives(const ThetaDerivatives& d) {
  const double q = std::sqrt(d.value);
  ThetaDerivatives out;
  out.value = q;
  out.gradient = d.gradient / (2.0 * q);
  out.hessian = d.hessian / (2.0 * q) -
                d.gradient * d.gradient.transpose() / (4.0 * d.value * q);
  return out;
}

}  // namespace projfilt
