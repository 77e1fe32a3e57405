#pragma once

#include <cmath>
#include <utility>

#include "projfilt/embedding.hpp"

namespace projfilt {

/// Circle of the given radius in the plane, chart = angle.
inline Embedding circle_embedding(double radius = 1.0) {
  Embedding e;
  e.chart_dim = 1;
  e.ambient_dim = 2;
  e.value = [radius](const VectorXd& theta) {
    VectorXd out(2);
    out << radius * std::cos(theta[0]), radius * std::sin(theta[0]);
    return out;
  };
  e.jacobian = [radius](const VectorXd& theta) {
    MatrixXd jac(2, 1);
    jac << -radius * std::sin(theta[0]), radius * std::cos(theta[0]);
    return jac;
  };
  e.second_derivative = [radius](const VectorXd& theta) {
    std::vector<MatrixXd> d2(2, MatrixXd(1, 1));
    d2[0](0, 0) = -radius * std::cos(theta[0]);
    d2[1](0, 0) = -radius * std::sin(theta[0]);
    return d2;
  };
  return e;
}

/// Axis-aligned ellipse with semi-axes a and b, chart = angle.
inline Embedding ellipse_embedding(double a, double b) {
  Embedding e;
  e.chart_dim = 1;
  e.ambient_dim = 2;
  e.value = [a, b](const VectorXd& theta) {
    VectorXd out(2);
    out << a * std::cos(theta[0]), b * std::sin(theta[0]);
    return out;
  };
  e.jacobian = [a, b](const VectorXd& theta) {
    MatrixXd jac(2, 1);
    jac << -a * std::sin(theta[0]), b * std::cos(theta[0]);
    return jac;
  };
  e.second_derivative = [a, b](const VectorXd& theta) {
    std::vector<MatrixXd> d2(2, MatrixXd(1, 1));
    d2[0](0, 0) = -a * std::cos(theta[0]);
    d2[1](0, 0) = -b * std::sin(theta[0]);
    return d2;
  };
  return e;
}

/// Affine subspace theta -> basis * theta + offset.
inline Embedding affine_embedding(MatrixXd basis, VectorXd offset) {
  Embedding e;
  e.chart_dim = static_cast<int>(basis.cols());
  e.ambient_dim = static_cast<int>(basis.rows());
  const int n = e.chart_dim;
  const int r = e.ambient_dim;
  e.value = [basis, offset](const VectorXd& theta) {
    return VectorXd(basis * theta + offset);
  };
  e.jacobian = [basis](const VectorXd&) { return basis; };
  e.second_derivative = [n, r](const VectorXd&) {
    return std::vector<MatrixXd>(static_cast<std::size_t>(r),
                                 MatrixXd::Zero(n, n));
  };
  return e;
}

}  // namespace projfilt
