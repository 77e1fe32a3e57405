#include "projfilt/family_geometry.hpp"

#include <cmath>

namespace projfilt {

double expectation(const DensityFamily& family, const VectorXd& theta,
                   const std::function<double(double)>& f,
                   const GaussHermiteRule& rule) {
  family.validate(theta);
  const double c = family.quadrature_center(theta);
  const double s = family.quadrature_scale(theta);
  return integrate_recentered(rule, c, s, [&](double x) {
    return f(x) * family.density(theta, x);
  });
}

double family_inner_product(const DensityFamily& family, const VectorXd& theta,
                            MetricMode mode,
                            const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const GaussHermiteRule& rule) {
  family.validate(theta);
  const double c = family.quadrature_center(theta);
  const double s = family.quadrature_scale(theta);
  // product of two sqrt(p)-like factors decays like p; of two p-like
  // factors decays like p^2, i.e. a Gaussian with scale s / sqrt(2)
  const double scale = mode == MetricMode::hellinger ? s : s / std::sqrt(2.0);
  return integrate_recentered(rule, c, scale,
                              [&](double x) { return f(x) * g(x); });
}

FamilyGeometry family_metric(const DensityFamily& family, const VectorXd& theta,
                             MetricMode mode, const GaussHermiteRule& rule) {
  family.validate(theta);
  const int n = family.dim();

  FamilyGeometry geom;
  geom.mode = mode;
  geom.theta = theta;
  geom.element = [&family, theta, mode](double x) {
    const double p = family.density(theta, x);
    return mode == MetricMode::hellinger ? std::sqrt(p) : p;
  };
  geom.tangents = [&family, theta, mode](double x) {
    const ThetaDerivatives d = family.theta_derivatives(theta, x);
    return mode == MetricMode::hellinger ? VectorXd(sqrt_theta_derivatives(d).gradient)
                                         : d.gradient;
  };
  geom.second_tangents = [&family, theta, mode](double x) {
    const ThetaDerivatives d = family.theta_derivatives(theta, x);
    return mode == MetricMode::hellinger ? MatrixXd(sqrt_theta_derivatives(d).hessian)
                                         : d.hessian;
  };

  const double c = family.quadrature_center(theta);
  const double s = family.quadrature_scale(theta);
  const double scale = mode == MetricMode::hellinger ? s : s / std::sqrt(2.0);
  MatrixXd metric = MatrixXd::Zero(n, n);
  const double stretch = std::sqrt(2.0) * scale;
  for (int k = 0; k < rule.nodes.size(); ++k) {
    const double x = c + stretch * rule.nodes[k];
    const VectorXd tang = geom.tangents(x);
    metric += (stretch * rule.scaled_weights[k]) * (tang * tang.transpose());
  }
  geom.metric = metric;

  const Eigen::LDLT<MatrixXd> ldlt(metric);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw DegenerateFamilyError("family metric is not positive definite");
  }
  geom.metric_inverse = ldlt.solve(MatrixXd::Identity(n, n));

  const MatrixXd inverse = geom.metric_inverse;
  const auto tangents = geom.tangents;
  geom.dual_basis = [inverse, tangents](double x) {
    return VectorXd(inverse * tangents(x));
  };
  return geom;
}

}  // namespace projfilt
