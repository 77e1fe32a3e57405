#include "projfilt/embedding.hpp"

#include <cmath>
#include <sstream>

namespace projfilt {

namespace {

constexpr double kJacobianStep = 1e-5;
constexpr double kSecondDerivativeStep = 1e-4;
constexpr double kConditionLimit = 1e12;

VectorXd shifted(const VectorXd& theta, int i, double h) {
  VectorXd out = theta;
  out[i] += h;
  return out;
}

}  // namespace

MatrixXd embedding_jacobian(const Embedding& e, const VectorXd& theta) {
  if (e.jacobian) return e.jacobian(theta);
  MatrixXd jac(e.ambient_dim, e.chart_dim);
  for (int i = 0; i < e.chart_dim; ++i) {
    const double h = kJacobianStep * (1.0 + std::abs(theta[i]));
    jac.col(i) =
        (e.value(shifted(theta, i, h)) - e.value(shifted(theta, i, -h))) /
        (2.0 * h);
  }
  return jac;
}

std::vector<MatrixXd> embedding_second_derivative(const Embedding& e,
                                                  const VectorXd& theta) {
  if (e.second_derivative) return e.second_derivative(theta);
  const int n = e.chart_dim;
  const int r = e.ambient_dim;
  std::vector<MatrixXd> d2(static_cast<std::size_t>(r), MatrixXd::Zero(n, n));
  const VectorXd base = e.value(theta);
  for (int i = 0; i < n; ++i) {
    const double hi = kSecondDerivativeStep * (1.0 + std::abs(theta[i]));
    const VectorXd diag = (e.value(shifted(theta, i, hi)) - 2.0 * base +
                           e.value(shifted(theta, i, -hi))) /
                          (hi * hi);
    for (int g = 0; g < r; ++g) d2[static_cast<std::size_t>(g)](i, i) = diag[g];
    for (int j = i + 1; j < n; ++j) {
      const double hj = kSecondDerivativeStep * (1.0 + std::abs(theta[j]));
      VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
      pp[i] += hi; pp[j] += hj;
      pm[i] += hi; pm[j] -= hj;
      mp[i] -= hi; mp[j] += hj;
      mm[i] -= hi; mm[j] -= hj;
      const VectorXd mixed =
          (e.value(pp) - e.value(pm) - e.value(mp) + e.value(mm)) /
          (4.0 * hi * hj);
      for (int g = 0; g < r; ++g) {
        d2[static_cast<std::size_t>(g)](i, j) = mixed[g];
        d2[static_cast<std::size_t>(g)](j, i) = mixed[g];
      }
    }
  }
  return d2;
}

namespace {

ChartMetric metric_from_jacobian(const MatrixXd& jac) {
  ChartMetric m;
  m.value = jac.transpose() * jac;
  const Eigen::LDLT<MatrixXd> ldlt(m.value);
  const VectorXd pivots = ldlt.vectorD();
  const double dmax = pivots.maxCoeff();
  const double dmin = pivots.minCoeff();
  if (ldlt.info() != Eigen::Success || dmin <= 0.0 ||
      dmax / dmin > kConditionLimit) {
    std::ostringstream msg;
    msg << "chart Jacobian is rank deficient at the queried point (pullback "
           "metric pivots "
        << pivots.transpose() << ")";
    throw DegenerateChartError(msg.str());
  }
  m.inverse = ldlt.solve(MatrixXd::Identity(jac.cols(), jac.cols()));
  return m;
}

}  // namespace

ChartMetric metric_tensor(const Embedding& e, const VectorXd& theta) {
  return metric_from_jacobian(embedding_jacobian(e, theta));
}

VectorXd tangent_projection(const Embedding& e, const VectorXd& theta,
                            const VectorXd& v) {
  const MatrixXd jac = embedding_jacobian(e, theta);
  const ChartMetric m = metric_from_jacobian(jac);
  return m.inverse * (jac.transpose() * v);
}

MatrixXd ambient_projector(const Embedding& e, const VectorXd& theta) {
  const MatrixXd jac = embedding_jacobian(e, theta);
  const ChartMetric m = metric_from_jacobian(jac);
  return jac * m.inverse * jac.transpose();
}

VectorXd hessian_contraction(const Embedding& e, const VectorXd& theta,
                             const VectorXd& u, const VectorXd& v) {
  const std::vector<MatrixXd> d2 = embedding_second_derivative(e, theta);
  VectorXd out(e.ambient_dim);
  for (int g = 0; g < e.ambient_dim; ++g) {
    out[g] = u.dot(d2[static_cast<std::size_t>(g)] * v);
  }
  return out;
}

VectorXd metric_projection(const Embedding& e, const VectorXd& x,
                           const VectorXd& theta0,
                           const MetricProjectionOptions& opts) {
  VectorXd theta = theta0;

  const auto first_order = [&](const VectorXd& point) {
    return VectorXd(embedding_jacobian(e, point).transpose() *
                    (x - e.value(point)));
  };

  VectorXd grad = first_order(theta);
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const MatrixXd jac = embedding_jacobian(e, theta);
    const ChartMetric m = metric_from_jacobian(jac);
    const VectorXd residual = x - e.value(theta);

    // Hessian of the squared distance; its positivity is exactly where the
    // closest-point map is well defined.
    const std::vector<MatrixXd> d2 = embedding_second_derivative(e, theta);
    MatrixXd curvature = m.value;
    for (int g = 0; g < e.ambient_dim; ++g) {
      curvature -= residual[g] * d2[static_cast<std::size_t>(g)];
    }
    const Eigen::LDLT<MatrixXd> curvature_ldlt(curvature);
    const bool positive = curvature_ldlt.info() == Eigen::Success &&
                          curvature_ldlt.vectorD().minCoeff() >
                              1e-8 * m.value.norm();

    if (grad.norm() <= opts.tolerance) {
      if (!positive) {
        throw OutsideTubularNeighborhoodError(
            "closest-point projection degenerates at the converged point");
      }
      return theta;
    }

    // Newton step on the first-order condition when the distance Hessian is
    // positive, Gauss-Newton direction otherwise; halve the step until the
    // first-order condition shrinks.
    const VectorXd step = positive ? VectorXd(curvature_ldlt.solve(grad))
                                   : VectorXd(m.inverse * grad);
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const VectorXd candidate = theta + scale * step;
      const VectorXd cand_grad = first_order(candidate);
      if (cand_grad.norm() < grad.norm()) {
        theta = candidate;
        grad = cand_grad;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      throw OutsideTubularNeighborhoodError(
          "closest-point descent stalled without meeting the first-order "
          "condition");
    }
  }
  throw OutsideTubularNeighborhoodError(
      "closest-point projection did not converge");
}

}  // namespace projfilt
