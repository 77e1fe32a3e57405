#include "projfilt/sde.hpp"

#include <cmath>
#include <sstream>

namespace projfilt {
namespace detail {

std::vector<MatrixXd> diffusion_jacobian_fd(const DiffusionFn& diffusion, int dim,
                                            int num_noises, const VectorXd& x,
                                            double t) {
  std::vector<MatrixXd> jac(static_cast<std::size_t>(num_noises),
                            MatrixXd::Zero(dim, dim));
  for (int j = 0; j < dim; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(x[j]));
    VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const MatrixXd bp = diffusion(xp, t);
    const MatrixXd bm = diffusion(xm, t);
    for (int alpha = 0; alpha < num_noises; ++alpha) {
      jac[static_cast<std::size_t>(alpha)].col(j) =
          (bp.col(alpha) - bm.col(alpha)) / (2.0 * h);
    }
  }
  return jac;
}

VectorXd drift_correction(const DiffusionFn& diffusion,
                          const DiffusionJacobianFn& jacobian, int dim,
                          int num_noises, const VectorXd& x, double t) {
  const std::vector<MatrixXd> jac =
      jacobian ? jacobian(x, t)
               : diffusion_jacobian_fd(diffusion, dim, num_noises, x, t);
  const MatrixXd b = diffusion(x, t);
  VectorXd corr = VectorXd::Zero(dim);
  for (int alpha = 0; alpha < num_noises; ++alpha) {
    corr += jac[static_cast<std::size_t>(alpha)] * b.col(alpha);
  }
  if (!all_finite(corr)) {
    std::ostringstream msg;
    msg << "non-finite diffusion derivative at state [" << x.transpose() << "]";
    throw EvaluationError(msg.str());
  }
  return corr;
}

}  // namespace detail

StratonovichSde ito_to_stratonovich(const ItoSde& sde) {
  StratonovichSde out;
  out.dim = sde.dim;
  out.num_noises = sde.num_noises;
  out.diffusion = sde.diffusion;
  out.diffusion_jacobian = sde.diffusion_jacobian;
  out.drift = [sde](const VectorXd& x, double t) {
    return VectorXd(sde.drift(x, t) -
                    0.5 * detail::drift_correction(sde.diffusion,
                                                   sde.diffusion_jacobian, sde.dim,
                                                   sde.num_noises, x, t));
  };
  return out;
}

ItoSde stratonovich_to_ito(const StratonovichSde& sde) {
  ItoSde out;
  out.dim = sde.dim;
  out.num_noises = sde.num_noises;
  out.diffusion = sde.diffusion;
  out.diffusion_jacobian = sde.diffusion_jacobian;
  out.drift = [sde](const VectorXd& x, double t) {
    return VectorXd(sde.drift(x, t) +
                    0.5 * detail::drift_correction(sde.diffusion,
                                                   sde.diffusion_jacobian, sde.dim,
                                                   sde.num_noises, x, t));
  };
  return out;
}

VectorXd euler_maruyama_step(const ItoSde& sde, const VectorXd& x, double t,
                             double dt, const VectorXd& dW) {
  VectorXd next = x + sde.drift(x, t) * dt + sde.diffusion(x, t) * dW;
  if (!all_finite(next)) {
    std::ostringstream msg;
    msg << "divergent step at t=" << t << " from state [" << x.transpose() << "]";
    throw DivergenceError(msg.str());
  }
  return next;
}

SamplePath simulate_path(const ItoSde& sde, const VectorXd& x0, double horizon,
                         double dt, std::uint64_t seed) {
  const double steps_real = horizon / dt;
  const auto steps = static_cast<long>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) >
      1e-9 * std::max(1.0, steps_real)) {
    throw ConfigError("horizon is not an integer number of steps");
  }

  SamplePath path;
  path.times.resize(steps + 1);
  path.states.resize(sde.dim, steps + 1);
  path.increments.resize(sde.num_noises, std::max<long>(steps, 0));
  path.states.col(0) = x0;

  std::vector<CounterRng> streams;
  streams.reserve(static_cast<std::size_t>(sde.num_noises));
  for (int alpha = 0; alpha < sde.num_noises; ++alpha) {
    streams.push_back(CounterRng::derive(seed, static_cast<std::uint64_t>(alpha)));
  }

  const double sqrt_dt = std::sqrt(dt);
  VectorXd x = x0;
  for (long k = 0; k < steps; ++k) {
    path.times[k] = static_cast<double>(k) * dt;
    VectorXd dW(sde.num_noises);
    for (int alpha = 0; alpha < sde.num_noises; ++alpha) {
      dW[alpha] =
          sqrt_dt * streams[static_cast<std::size_t>(alpha)].normal(
                        static_cast<std::uint64_t>(k));
    }
    path.increments.col(k) = dW;
    try {
      x = euler_maruyama_step(sde, x, path.times[k], dt, dW);
    } catch (const DivergenceError& err) {
      std::ostringstream msg;
      msg << err.what() << " (step " << k << ")";
      throw DivergenceError(msg.str());
    }
    path.states.col(k + 1) = x;
  }
  path.times[steps] = static_cast<double>(steps) * dt;
  return path;
}

}  // namespace projfilt
