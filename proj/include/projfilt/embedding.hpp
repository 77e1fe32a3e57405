#pragma once

#include <functional>
#include <vector>

#include "projfilt/common.hpp"

namespace projfilt {

/// Parameterized submanifold of R^r given by a smooth map from chart
/// coordinates in R^n, r > n. Jacobian and second derivatives may be
/// supplied analytically; missing ones fall back to central differences.
struct Embedding {
  int chart_dim = 0;
  int ambient_dim = 0;
  std::function<VectorXd(const VectorXd&)> value;     // R^n -> R^r
  std::function<MatrixXd(const VectorXd&)> jacobian;  // r x n, optional
  // entry gamma is the n x n matrix of second chart derivatives of
  // component gamma; optional
  std::function<std::vector<MatrixXd>(const VectorXd&)> second_derivative;
};

/// Pullback metric at a chart point together with its inverse.
struct ChartMetric {
  MatrixXd value;
  MatrixXd inverse;
};

MatrixXd embedding_jacobian(const Embedding& e, const VectorXd& theta);
std::vector<MatrixXd> embedding_second_derivative(const Embedding& e,
                                                  const VectorXd& theta);

/// J^T J and its inverse; throws DegenerateChartError when the Jacobian
/// condition number exceeds 1e12.
ChartMetric metric_tensor(const Embedding& e, const VectorXd& theta);

/// Chart coordinates of the orthogonal projection of an ambient vector
/// onto the tangent space: solves (J^T J) w = J^T v.
VectorXd tangent_projection(const Embedding& e, const VectorXd& theta,
                            const VectorXd& v);

/// The r x r orthogonal projector onto the tangent space at theta.
MatrixXd ambient_projector(const Embedding& e, const VectorXd& theta);

/// sum_ij d2phi/dtheta_i dtheta_j u_i v_j as an ambient vector.
VectorXd hessian_contraction(const Embedding& e, const VectorXd& theta,
                             const VectorXd& u, const VectorXd& v);

struct MetricProjectionOptions {
  double tolerance = 1e-10;  // on the first-order condition J^T (x - phi)
  int max_iterations = 100;
};

/// Closest chart point to an ambient point, found by damped Gauss-Newton
/// descent from theta0. Throws OutsideTubularNeighborhoodError when the
/// iteration fails to converge or lands on a critical point that is not a
/// local minimum of the distance.
VectorXd metric_projection(const Embedding& e, const VectorXd& x,
                           const VectorXd& theta0,
                           const MetricProjectionOptions& opts = {});

}  // namespace projfilt
