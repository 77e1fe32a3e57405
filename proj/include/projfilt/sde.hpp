#pragma once

#include <functional>
#include <utility>

#include "projfilt/common.hpp"
#include "projfilt/rng.hpp"

namespace projfilt {

using DriftFn = std::function<VectorXd(const VectorXd&, double)>;
using DiffusionFn = std::function<MatrixXd(const VectorXd&, double)>;
// Jacobians of the diffusion columns: entry alpha is the r x r matrix
// d b_alpha / d x. Leave empty to fall back to central differences.
using DiffusionJacobianFn =
    std::function<std::vector<MatrixXd>(const VectorXd&, double)>;

struct ItoSde {
  int dim = 0;
  int num_noises = 0;
  DriftFn drift;
  DiffusionFn diffusion;
  DiffusionJacobianFn diffusion_jacobian;  // optional
};

struct StratonovichSde {
  int dim = 0;
  int num_noises = 0;
  DriftFn drift;
  DiffusionFn diffusion;
  DiffusionJacobianFn diffusion_jacobian;  // optional
};

struct SamplePath {
  VectorXd times;       // uniform grid, length steps + 1
  MatrixXd states;      // dim x (steps + 1)
  MatrixXd increments;  // num_noises x steps, the dW actually consumed
};

namespace detail {

/// Central-difference Jacobians of the diffusion columns, step 1e-5 * (1+|x|).
std::vector<MatrixXd> diffusion_jacobian_fd(const DiffusionFn& diffusion, int dim,
                                            int num_noises, const VectorXd& x,
                                            double t);

/// sum_alpha (d b_alpha / d x) b_alpha, the Ito/Stratonovich drift gap (x2).
VectorXd drift_correction(const DiffusionFn& diffusion,
                          const DiffusionJacobianFn& jacobian, int dim,
                          int num_noises, const VectorXd& x, double t);

}  // namespace detail

StratonovichSde ito_to_stratonovich(const ItoSde& sde);
ItoSde stratonovich_to_ito(const StratonovichSde& sde);

/// One Euler-Maruyama step: x + a dt + b dW. Throws DivergenceError on a
/// non-finite result.
VectorXd euler_maruyama_step(const ItoSde& sde, const VectorXd& x, double t,
                             double dt, const VectorXd& dW);

/// Simulates horizon/dt Euler-Maruyama steps with Gaussian increments of
/// variance dt, one counter-based stream per noise component.
SamplePath simulate_path(const ItoSde& sde, const VectorXd& x0, double horizon,
                         double dt, std::uint64_t seed);

}  // namespace projfilt
