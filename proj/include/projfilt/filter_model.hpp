#pragma once

#include <functional>

#include "projfilt/common.hpp"

namespace projfilt {

using ScalarFn = std::function<double(double, double)>;  // (x, t)

/// Scalar filtering model: signal dX = f dt + sigma dW, observation
/// dY = b(X) dt + dV with unit observation noise.
struct FilterModel {
  ScalarFn drift;              // f
  ScalarFn drift_dx;           // f'
  ScalarFn diffusion;          // sigma
  ScalarFn diffusion_sq;       // sigma^2
  ScalarFn diffusion_sq_dx;    // (sigma^2)'
  ScalarFn diffusion_sq_dxx;   // (sigma^2)''
  ScalarFn observation;        // b
  ScalarFn observation_dx;     // b'
};

/// Trivial signal dX = dW observed through b(x) = x + epsilon x^3.
FilterModel cubic_sensor_model(double epsilon);

/// Linear sensor b(x) = beta x with constant signal diffusion and linear
/// signal drift f(x) = drift_slope * x.
FilterModel linear_sensor_model(double beta = 1.0, double sigma = 1.0,
                                double drift_slope = 0.0);

/// Value, first and second spatial derivatives of a density at one point.
struct DensityPoint {
  double value = 0.0;
  double dx = 0.0;
  double dxx = 0.0;
};

/// Forward diffusion (Fokker-Planck) operator applied to a density point:
/// -(f p)' + ((sigma^2 p)'')/2.
double forward_operator(const FilterModel& model, const DensityPoint& p,
                        double x, double t);

}  // namespace projfilt
