#pragma once

#include "projfilt/family_geometry.hpp"
#include "projfilt/filter_model.hpp"
#include "projfilt/projection.hpp"

namespace projfilt {

struct FilterState {
  VectorXd theta;  // (mean, standard deviation) for the Gaussian family
  double time = 0.0;
};

/// Ito-form coefficient fields of the filtering equation realized on the
/// family: drift and diffusion of d(element) = mu dt + Sigma dY, plus the
/// Stratonovich-form drift used by the Stratonovich projection.
struct KsCoefficients {
  std::function<double(double)> drift_field;        // mu, Ito form
  std::function<double(double)> strat_drift_field;  // Stratonovich form
  std::function<double(double)> diffusion_field;    // Sigma
  double expected_obs = 0.0;                        // E_p[b]
  double expected_obs_sq = 0.0;                     // E_p[b^2]
};

KsCoefficients ks_coefficients(const FilterModel& model,
                               const DensityFamily& family,
                               const VectorXd& theta, double t, MetricMode mode,
                               const GaussHermiteRule& rule);

/// Chart coefficients of one projection filter at a parameter point. The
/// diffusion is evaluated by a single shared routine for all three kinds.
/// stated_drift is the drift of the filter equation in the calculus it is
/// written in (Stratonovich form for the Stratonovich filter, Ito
/// otherwise); drift is always the Ito drift used for stepping.
struct ProjectionFilterCoefficients {
  VectorXd drift;
  VectorXd stated_drift;
  VectorXd diffusion;
};

/// The shared diffusion coefficient B.
VectorXd projection_filter_diffusion(const FilterModel& model,
                                     const DensityFamily& family,
                                     const VectorXd& theta, double t,
                                     MetricMode mode,
                                     const GaussHermiteRule& rule);

ProjectionFilterCoefficients projection_filter_coefficients(
    const FilterModel& model, const DensityFamily& family,
    const VectorXd& theta, double t, ProjectionKind kind, MetricMode mode,
    const GaussHermiteRule& rule);

/// One Euler-Maruyama step of the projected filter. A step that exits the
/// family retries once as two half steps (splitting dY evenly), then
/// throws BoundaryError.
FilterState projection_filter_step(const FilterModel& model,
                                   const DensityFamily& family,
                                   const FilterState& state, double dt,
                                   double dY, ProjectionKind kind,
                                   MetricMode mode,
                                   const GaussHermiteRule& rule);

FilterState strat_filter_step(const FilterModel& model,
                              const DensityFamily& family,
                              const FilterState& state, double dt, double dY,
                              MetricMode mode, const GaussHermiteRule& rule);
FilterState ito_vector_filter_step(const FilterModel& model,
                                   const DensityFamily& family,
                                   const FilterState& state, double dt,
                                   double dY, MetricMode mode,
                                   const GaussHermiteRule& rule);
FilterState ito_jet_filter_step(const FilterModel& model,
                                const DensityFamily& family,
                                const FilterState& state, double dt, double dY,
                                MetricMode mode, const GaussHermiteRule& rule);

struct MomentState {
  double mean = 0.0;
  double var = 1.0;
};

/// Kalman-Bucy step for the linear sensor b(x) = beta x with unit
/// observation noise.
MomentState kalman_step(double beta, double sigma, const MomentState& state,
                        double dt, double dY);

/// Extended Kalman step: linearize b at the mean.
MomentState ekf_step(const FilterModel& model, const MomentState& state,
                     double dt, double dY, double t = 0.0);

/// Gaussian assumed-density step by moment matching under N(mean, var).
MomentState gaussian_adf_step(const FilterModel& model, const MomentState& state,
                              double dt, double dY, const GaussHermiteRule& rule,
                              double t = 0.0);

/// Drift of the classical filters expressed in the (mean, sd) chart, for
/// coefficient-level comparisons.
VectorXd adf_chart_drift(const FilterModel& model, const VectorXd& theta,
                         const GaussHermiteRule& rule, double t = 0.0);
VectorXd ekf_chart_drift(const FilterModel& model, const VectorXd& theta,
                         double t = 0.0);

}  // namespace projfilt
