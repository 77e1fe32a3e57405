#include "projfilt/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace projfilt {

GaussHermiteRule gauss_hermite_rule(int order) {
  if (order < 1) throw ConfigError("quadrature order must be positive");
  MatrixXd jacobi = MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double off = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights.resize(order);
  rule.scaled_weights.resize(order);
  const double sqrt_pi = std::sqrt(3.14159265358979323846);
  for (int k = 0; k < order; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights[k] = sqrt_pi * v0 * v0;
    rule.scaled_weights[k] =
        rule.weights[k] * std::exp(rule.nodes[k] * rule.nodes[k]);
  }
  return rule;
}

double integrate_recentered(const GaussHermiteRule& rule, double center,
                            double scale,
                            const std::function<double(double)>& f) {
  const double stretch = std::sqrt(2.0) * scale;
  double sum = 0.0;
  for (int k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.scaled_weights[k] * f(center + stretch * rule.nodes[k]);
  }
  return stretch * sum;
}

double trapezoid(const VectorXd& values, double dx) {
  if (values.size() < 2) return 0.0;
  return dx * (values.sum() - 0.5 * (values[0] + values[values.size() - 1]));
}

}  // namespace projfilt
