#include "projfilt/grid_filter.hpp"

#include "projfilt/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace projfilt {

GridDensity make_grid_density(double half_width, int points,
                              const std::function<double(double)>& density) {
  if (points < 3) throw ConfigError("grid needs at least 3 points");
  if (!(half_width > 0.0)) throw ConfigError("grid half width must be positive");
  GridDensity grid;
  grid.half_width = half_width;
  grid.values.resize(points);
  for (int i = 0; i < points; ++i) {
    grid.values[i] = std::max(density(grid.node(i)), 0.0);
  }
  const double mass = trapezoid(grid.values, grid.dx());
  if (mass <= 0.0) throw SolverFailureError("initial grid density has no mass");
  grid.values /= mass;
  return grid;
}

namespace {

// Solves the tridiagonal system in place (Thomas algorithm). lower[i] is
// the coefficient of x[i-1] in row i, upper[i] of x[i+1].
void solve_tridiagonal(VectorXd& lower, VectorXd& diag, VectorXd& upper,
                       VectorXd& rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

}  // namespace

void fd_ks_step(const FilterModel& model, GridDensity& density, double t,
                double dt, double dY) {
  const int n = density.points();
  const double dx = density.dx();
  if (dt < 0.0) throw ConfigError("negative dt");

  if (dt > 0.0) {
    // implicit Fokker-Planck substep: rows of I - dt * L*
    VectorXd lower = VectorXd::Zero(n);
    VectorXd diag = VectorXd::Ones(n);
    VectorXd upper = VectorXd::Zero(n);
    VectorXd rhs = density.values;

    const double inv_dx2 = 1.0 / (dx * dx);
    for (int i = 1; i + 1 < n; ++i) {
      const double x = density.node(i);
      double c_lower = 0.5 * model.diffusion_sq(x - dx, t) * inv_dx2;
      double c_diag = -model.diffusion_sq(x, t) * inv_dx2;
      double c_upper = 0.5 * model.diffusion_sq(x + dx, t) * inv_dx2;

      // upwinded fluxes of (f p)'
      const double f_right = model.drift(x + 0.5 * dx, t);
      const double f_left = model.drift(x - 0.5 * dx, t);
      if (f_right >= 0.0) {
        c_diag -= f_right / dx;
      } else {
        c_upper -= f_right / dx;
      }
      if (f_left >= 0.0) {
        c_lower += f_left / dx;
      } else {
        c_diag += f_left / dx;
      }

      lower[i] = -dt * c_lower;
      diag[i] = 1.0 - dt * c_diag;
      upper[i] = -dt * c_upper;
    }
    // zero boundary values
    rhs[0] = 0.0;
    rhs[n - 1] = 0.0;
    solve_tridiagonal(lower, diag, upper, rhs);
    density.values = rhs;
  }

  // multiplicative observation update, floored at zero
  VectorXd weighted(n);
  for (int i = 0; i < n; ++i) {
    weighted[i] = density.values[i] * model.observation(density.node(i), t);
  }
  const double expected_obs = trapezoid(weighted, dx);
  for (int i = 0; i < n; ++i) {
    const double factor =
        1.0 + (model.observation(density.node(i), t) - expected_obs) *
                  (dY - expected_obs * dt);
    density.values[i] = std::max(density.values[i] * factor, 0.0);
  }

  const double mass = trapezoid(density.values, dx);
  if (!(mass > 1e-8)) {
    std::ostringstream msg;
    msg << "grid density mass collapsed to " << mass << " at t=" << t;
    throw SolverFailureError(msg.str());
  }
  density.values /= mass;

  if (density.boundary_value() > density.boundary_tolerance) {
    std::ostringstream msg;
    msg << "boundary density " << density.boundary_value() << " at t=" << t
        << " exceeds " << density.boundary_tolerance
        << "; enlarge the grid domain";
    throw DomainTooSmallError(msg.str());
  }
}

std::pair<double, double> grid_moments(const GridDensity& density) {
  const int n = density.points();
  VectorXd xp(n), xxp(n);
  for (int i = 0; i < n; ++i) {
    xp[i] = density.node(i) * density.values[i];
    xxp[i] = density.node(i) * density.node(i) * density.values[i];
  }
  const double mean = trapezoid(xp, density.dx());
  const double second = trapezoid(xxp, density.dx());
  return {mean, second - mean * mean};
}

double residual(const GridDensity& density, const DensityFamily& family,
                const VectorXd& theta, ResidualMode mode) {
  const int n = density.points();
  VectorXd squared(n);
  for (int i = 0; i < n; ++i) {
    const double member = family.density(theta, density.node(i));
    const double diff = mode == ResidualMode::l2
                            ? density.values[i] - member
                            : std::sqrt(density.values[i]) - std::sqrt(member);
    squared[i] = diff * diff;
  }
  return std::sqrt(trapezoid(squared, density.dx()));
}

double grid_l2_distance(const GridDensity& a, const GridDensity& b) {
  if (a.points() != b.points() || a.half_width != b.half_width) {
    throw ShapeError("grid densities live on different grids");
  }
  const VectorXd diff = a.values - b.values;
  return std::sqrt(trapezoid(diff.cwiseProduct(diff), a.dx()));
}

GridKsCoefficients grid_ks_coefficients(const FilterModel& model,
                                        const GridDensity& density, double t,
                                        MetricMode mode) {
  const int n = density.points();
  const double dx = density.dx();
  const double mass = trapezoid(density.values, dx);
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "grid density mass " << mass << " needs renormalization";
    throw RenormalizationRequiredError(msg.str());
  }

  VectorXd weighted(n);
  for (int i = 0; i < n; ++i) {
    weighted[i] = density.values[i] * model.observation(density.node(i), t);
  }
  GridKsCoefficients out;
  out.expected_obs = trapezoid(weighted, dx);
  out.drift_field = VectorXd::Zero(n);
  out.diffusion_field = VectorXd::Zero(n);

  for (int i = 1; i + 1 < n; ++i) {
    const double x = density.node(i);
    const double b = model.observation(x, t);
    const double p = density.values[i];
    const double p_dx = (density.values[i + 1] - density.values[i - 1]) / (2.0 * dx);
    const double p_dxx =
        (density.values[i + 1] - 2.0 * p + density.values[i - 1]) / (dx * dx);
    const double forward =
        forward_operator(model, DensityPoint{p, p_dx, p_dxx}, x, t);
    if (mode == MetricMode::direct) {
      out.diffusion_field[i] = p * (b - out.expected_obs);
      out.drift_field[i] =
          forward - p * (b - out.expected_obs) * out.expected_obs;
    } else {
      const double root = std::sqrt(std::max(p, 1e-300));
      out.diffusion_field[i] = 0.5 * root * (b - out.expected_obs);
      out.drift_field[i] = forward / (2.0 * root) -
                           0.125 * root * (b - out.expected_obs) *
                               (b + 3.0 * out.expected_obs);
    }
  }
  return out;
}

}  // namespace projfilt
