#include "projfilt/filter_model.hpp"

namespace projfilt {

FilterModel cubic_sensor_model(double epsilon) {
  if (epsilon < 0.0) throw ConfigError("cubic sensor needs epsilon >= 0");
  FilterModel m;
  m.drift = [](double, double) { return 0.0; };
  m.drift_dx = [](double, double) { return 0.0; };
  m.diffusion = [](double, double) { return 1.0; };
  m.diffusion_sq = [](double, double) { return 1.0; };
  m.diffusion_sq_dx = [](double, double) { return 0.0; };
  m.diffusion_sq_dxx = [](double, double) { return 0.0; };
  m.observation = [epsilon](double x, double) { return x + epsilon * x * x * x; };
  m.observation_dx = [epsilon](double x, double) {
    return 1.0 + 3.0 * epsilon * x * x;
  };
  return m;
}

FilterModel linear_sensor_model(double beta, double sigma, double drift_slope) {
  if (!(sigma > 0.0)) throw ConfigError("linear sensor needs sigma > 0");
  FilterModel m;
  m.drift = [drift_slope](double x, double) { return drift_slope * x; };
  m.drift_dx = [drift_slope](double, double) { return drift_slope; };
  m.diffusion = [sigma](double, double) { return sigma; };
  m.diffusion_sq = [sigma](double, double) { return sigma * sigma; };
  m.diffusion_sq_dx = [](double, double) { return 0.0; };
  m.diffusion_sq_dxx = [](double, double) { return 0.0; };
  m.observation = [beta](double x, double) { return beta * x; };
  m.observation_dx = [beta](double, double) { return beta; };
  return m;
}

double forward_operator(const FilterModel& model, const DensityPoint& p,
                        double x, double t) {
  const double diffusion_part = 0.5 * (model.diffusion_sq_dxx(x, t) * p.value +
                                       2.0 * model.diffusion_sq_dx(x, t) * p.dx +
                                       model.diffusion_sq(x, t) * p.dxx);
  const double transport_part =
      model.drift_dx(x, t) * p.value + model.drift(x, t) * p.dx;
  return diffusion_part - transport_part;
}

}  // namespace projfilt
