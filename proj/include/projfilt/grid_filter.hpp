#pragma once

#include <functional>

#include "projfilt/density_family.hpp"
#include "projfilt/family_geometry.hpp"
#include "projfilt/filter_model.hpp"

namespace projfilt {

/// Normalized density sampled on a uniform grid over [-half_width,
/// half_width]; the working state of the finite-difference reference
/// filter.
struct GridDensity {
  double half_width = 0.0;
  VectorXd values;
  // density level at the outermost nodes that triggers
  // DomainTooSmallError; mass at that level visibly corrupts residuals
  double boundary_tolerance = 1e-6;

  int points() const { return static_cast<int>(values.size()); }
  double dx() const { return 2.0 * half_width / (points() - 1); }
  double node(int i) const { return -half_width + i * dx(); }
  double boundary_value() const {
    return std::max(values[0], values[values.size() - 1]);
  }
};

GridDensity make_grid_density(double half_width, int points,
                              const std::function<double(double)>& density);

/// Advances the grid density by one step of the normalized filtering
/// equation: implicit finite-difference Fokker-Planck substep (central
/// second differences, upwinded transport, zero boundary values), explicit
/// multiplicative observation update floored at zero, then renormalization.
void fd_ks_step(const FilterModel& model, GridDensity& density, double t,
                double dt, double dY);

/// Trapezoid mean and variance.
std::pair<double, double> grid_moments(const GridDensity& density);

enum class ResidualMode { l2, hellinger };

/// Distance between the grid density and a family member sampled on the
/// same grid: plain L2 for l2, L2 between square roots for hellinger.
double residual(const GridDensity& density, const DensityFamily& family,
                const VectorXd& theta, ResidualMode mode);

/// L2 distance between two grid densities on identical grids.
double grid_l2_distance(const GridDensity& a, const GridDensity& b);

/// Filtering coefficient fields sampled on the grid, with spatial
/// derivatives by central differences. Throws RenormalizationRequiredError
/// when the density is not normalized to 1e-6.
struct GridKsCoefficients {
  VectorXd drift_field;
  VectorXd diffusion_field;
  double expected_obs = 0.0;
};

GridKsCoefficients grid_ks_coefficients(const FilterModel& model,
                                        const GridDensity& density, double t,
                                        MetricMode mode);

}  // namespace projfilt
