#pragma once

#include <functional>

#include "projfilt/common.hpp"

namespace projfilt {

/// Gauss-Hermite rule for integrals against exp(-s^2). scaled_weights are
/// w_k * exp(s_k^2), ready for integrands that carry their own Gaussian
/// factor.
struct GaussHermiteRule {
  VectorXd nodes;
  VectorXd weights;
  VectorXd scaled_weights;
};

/// Nodes and weights by the Golub-Welsch eigendecomposition.
GaussHermiteRule gauss_hermite_rule(int order);

/// Integral of f over the real line after substituting x = center +
/// sqrt(2) * scale * s. Exact for f = polynomial * N(center, scale^2)
/// shapes up to degree 2*order - 1.
double integrate_recentered(const GaussHermiteRule& rule, double center,
                            double scale,
                            const std::function<double(double)>& f);

/// Trapezoid integral of f sampled on a uniform grid over [-half_width,
/// half_width].
double trapezoid(const VectorXd& values, double dx);

}  // namespace projfilt
