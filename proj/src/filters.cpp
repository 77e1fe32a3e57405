#include "projfilt/filters.hpp"

#include <cmath>
#include <sstream>

namespace projfilt {

namespace {

constexpr double kStratConversionStep = 1e-6;

struct NodeSet {
  VectorXd x;
  VectorXd w;
};

NodeSet make_nodes(const DensityFamily& family, const VectorXd& theta,
                   const GaussHermiteRule& rule, double scale_factor) {
  const double c = family.quadrature_center(theta);
  const double scale = family.quadrature_scale(theta) * scale_factor;
  const double stretch = std::sqrt(2.0) * scale;
  NodeSet nodes;
  nodes.x = ((stretch * rule.nodes).array() + c).matrix();
  nodes.w = stretch * rule.scaled_weights;
  return nodes;
}

struct FieldSamples {
  double Eb = 0.0;
  double Eb2 = 0.0;
  NodeSet nodes;                // mode-specific integration nodes
  VectorXd mu_ito;              // per node
  VectorXd mu_strat;
  VectorXd sigma_field;
  MatrixXd tangents;            // node x n
  std::vector<MatrixXd> seconds;  // per node, n x n
};

/// Samples the filtering coefficient fields and the family tangents on the
/// quadrature nodes of the given metric mode.
FieldSamples sample_fields(const FilterModel& model, const DensityFamily& family,
                           const VectorXd& theta, double t, MetricMode mode,
                           const GaussHermiteRule& rule) {
  family.validate(theta);
  FieldSamples out;

  const NodeSet weighted = make_nodes(family, theta, rule, 1.0);
  for (int k = 0; k < weighted.x.size(); ++k) {
    const double x = weighted.x[k];
    const double b = model.observation(x, t);
    const double p = family.density(theta, x);
    out.Eb += weighted.w[k] * b * p;
    out.Eb2 += weighted.w[k] * b * b * p;
  }

  out.nodes = mode == MetricMode::hellinger
                  ? weighted
                  : make_nodes(family, theta, rule, 1.0 / std::sqrt(2.0));
  const int q = static_cast<int>(out.nodes.x.size());
  const int n = family.dim();
  out.mu_ito.resize(q);
  out.mu_strat.resize(q);
  out.sigma_field.resize(q);
  out.tangents.resize(q, n);
  out.seconds.assign(static_cast<std::size_t>(q), MatrixXd(n, n));

  for (int k = 0; k < q; ++k) {
    const double x = out.nodes.x[k];
    const double b = model.observation(x, t);
    const ThetaDerivatives d = family.theta_derivatives(theta, x);
    const SpatialDerivatives sp = family.spatial_derivatives(theta, x);
    const double forward =
        forward_operator(model, DensityPoint{sp.value, sp.dx, sp.dxx}, x, t);

    if (mode == MetricMode::direct) {
      out.tangents.row(k) = d.gradient.transpose();
      out.seconds[static_cast<std::size_t>(k)] = d.hessian;
      const double centered = b - out.Eb;
      out.sigma_field[k] = d.value * centered;
      out.mu_ito[k] = forward - d.value * centered * out.Eb;
      out.mu_strat[k] = forward - 0.5 * d.value * (b * b - out.Eb2);
    } else {
      const ThetaDerivatives sq = sqrt_theta_derivatives(d);
      out.tangents.row(k) = sq.gradient.transpose();
      out.seconds[static_cast<std::size_t>(k)] = sq.hessian;
      const double centered = b - out.Eb;
      const double root = sq.value;
      out.sigma_field[k] = 0.5 * root * centered;
      out.mu_ito[k] = forward / (2.0 * root) -
                      0.125 * root * centered * (b + 3.0 * out.Eb);
      out.mu_strat[k] =
          forward / (2.0 * root) - 0.25 * root * (b * b - out.Eb2);
    }
  }
  return out;
}

MatrixXd assemble_metric(const FieldSamples& fields) {
  const int n = static_cast<int>(fields.tangents.cols());
  MatrixXd metric = MatrixXd::Zero(n, n);
  for (int k = 0; k < fields.nodes.x.size(); ++k) {
    metric += fields.nodes.w[k] * fields.tangents.row(k).transpose() *
              fields.tangents.row(k);
  }
  return metric;
}

MatrixXd invert_metric(const MatrixXd& metric) {
  const Eigen::LDLT<MatrixXd> ldlt(metric);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw DegenerateFamilyError("family metric is not positive definite");
  }
  return ldlt.solve(MatrixXd::Identity(metric.rows(), metric.cols()));
}

}  // namespace

KsCoefficients ks_coefficients(const FilterModel& model,
                               const DensityFamily& family,
                               const VectorXd& theta, double t, MetricMode mode,
                               const GaussHermiteRule& rule) {
  family.validate(theta);
  KsCoefficients out;

  const NodeSet weighted = make_nodes(family, theta, rule, 1.0);
  for (int k = 0; k < weighted.x.size(); ++k) {
    const double x = weighted.x[k];
    const double b = model.observation(x, t);
    const double p = family.density(theta, x);
    out.expected_obs += weighted.w[k] * b * p;
    out.expected_obs_sq += weighted.w[k] * b * b * p;
  }
  const double Eb = out.expected_obs;
  const double Eb2 = out.expected_obs_sq;

  // The closures hold a pointer to the family; the caller keeps it alive.
  const DensityFamily* fam = &family;
  const auto density_point = [fam, theta](double x) {
    const SpatialDerivatives sp = fam->spatial_derivatives(theta, x);
    return DensityPoint{sp.value, sp.dx, sp.dxx};
  };

  if (mode == MetricMode::direct) {
    out.diffusion_field = [fam, theta, model, Eb, t](double x) {
      return fam->density(theta, x) * (model.observation(x, t) - Eb);
    };
    out.drift_field = [fam, theta, model, Eb, t, density_point](double x) {
      const double b = model.observation(x, t);
      return forward_operator(model, density_point(x), x, t) -
             fam->density(theta, x) * (b - Eb) * Eb;
    };
    out.strat_drift_field = [fam, theta, model, Eb2, t,
                             density_point](double x) {
      const double b = model.observation(x, t);
      return forward_operator(model, density_point(x), x, t) -
             0.5 * fam->density(theta, x) * (b * b - Eb2);
    };
  } else {
    out.diffusion_field = [fam, theta, model, Eb, t](double x) {
      return 0.5 * std::sqrt(fam->density(theta, x)) *
             (model.observation(x, t) - Eb);
    };
    out.drift_field = [fam, theta, model, Eb, t, density_point](double x) {
      const double b = model.observation(x, t);
      const double root = std::sqrt(fam->density(theta, x));
      return forward_operator(model, density_point(x), x, t) / (2.0 * root) -
             0.125 * root * (b - Eb) * (b + 3.0 * Eb);
    };
    out.strat_drift_field = [fam, theta, model, Eb2, t,
                             density_point](double x) {
      const double b = model.observation(x, t);
      const double root = std::sqrt(fam->density(theta, x));
      return forward_operator(model, density_point(x), x, t) / (2.0 * root) -
             0.25 * root * (b * b - Eb2);
    };
  }
  return out;
}

VectorXd projection_filter_diffusion(const FilterModel& model,
                                     const DensityFamily& family,
                                     const VectorXd& theta, double t,
                                     MetricMode mode,
                                     const GaussHermiteRule& rule) {
  const FieldSamples fields = sample_fields(model, family, theta, t, mode, rule);
  const MatrixXd inverse = invert_metric(assemble_metric(fields));
  const int n = family.dim();
  VectorXd projected = VectorXd::Zero(n);
  for (int k = 0; k < fields.nodes.x.size(); ++k) {
    projected += fields.nodes.w[k] * fields.sigma_field[k] *
                 fields.tangents.row(k).transpose();
  }
  return inverse * projected;
}

ProjectionFilterCoefficients projection_filter_coefficients(
    const FilterModel& model, const DensityFamily& family,
    const VectorXd& theta, double t, ProjectionKind kind, MetricMode mode,
    const GaussHermiteRule& rule) {
  const FieldSamples fields = sample_fields(model, family, theta, t, mode, rule);
  const int n = family.dim();
  const MatrixXd metric = assemble_metric(fields);
  const MatrixXd inverse = invert_metric(metric);

  // the diffusion comes from the one shared routine for every kind
  ProjectionFilterCoefficients out;
  out.diffusion = projection_filter_diffusion(model, family, theta, t, mode, rule);
  const VectorXd& B = out.diffusion;

  VectorXd m_ito = VectorXd::Zero(n);
  VectorXd m_strat = VectorXd::Zero(n);
  MatrixXd second_dot_sigma = MatrixXd::Zero(n, n);  // <d2 phi_ij, Sigma>
  std::vector<MatrixXd> second_dot_tangent(
      static_cast<std::size_t>(n), MatrixXd::Zero(n, n));  // [k](i,j) = <d2_ij, d_k>
  for (int k = 0; k < fields.nodes.x.size(); ++k) {
    const double w = fields.nodes.w[k];
    const VectorXd tang = fields.tangents.row(k).transpose();
    const MatrixXd& sec = fields.seconds[static_cast<std::size_t>(k)];
    m_ito += w * fields.mu_ito[k] * tang;
    m_strat += w * fields.mu_strat[k] * tang;
    second_dot_sigma += (w * fields.sigma_field[k]) * sec;
    for (int i = 0; i < n; ++i) {
      second_dot_tangent[static_cast<std::size_t>(i)] += (w * tang[i]) * sec;
    }
  }

  // quadratic curvature correction shared by both Ito projections
  VectorXd curvature(n);
  for (int i = 0; i < n; ++i) {
    curvature[i] = B.dot(second_dot_tangent[static_cast<std::size_t>(i)] * B);
  }
  const VectorXd ito_vector_drift = inverse * (m_ito - 0.5 * curvature);

  switch (kind) {
    case ProjectionKind::ito_vector: {
      out.drift = ito_vector_drift;
      out.stated_drift = out.drift;
      return out;
    }
    case ProjectionKind::ito_jet: {
      // normal component of Sigma against the curvature, contracted with B
      MatrixXd normal_part = second_dot_sigma;
      for (int i = 0; i < n; ++i) {
        normal_part -= B[i] * second_dot_tangent[static_cast<std::size_t>(i)];
      }
      out.drift = ito_vector_drift + inverse * (normal_part * B);
      out.stated_drift = out.drift;
      return out;
    }
    case ProjectionKind::stratonovich: {
      out.stated_drift = inverse * m_strat;
      VectorXd conversion = VectorXd::Zero(n);
      for (int j = 0; j < n; ++j) {
        const double h = kStratConversionStep * (1.0 + std::abs(theta[j]));
        VectorXd tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        const VectorXd dB =
            (projection_filter_diffusion(model, family, tp, t, mode, rule) -
             projection_filter_diffusion(model, family, tm, t, mode, rule)) /
            (2.0 * h);
        conversion += dB * B[j];
      }
      out.drift = out.stated_drift + 0.5 * conversion;
      return out;
    }
  }
  throw ConfigError("unknown projection kind");
}

namespace {

VectorXd euler_update(const VectorXd& theta, const VectorXd& drift,
                      const VectorXd& diffusion, double dt, double dY) {
  return theta + drift * dt + diffusion * dY;
}

}  // namespace

FilterState projection_filter_step(const FilterModel& model,
                                   const DensityFamily& family,
                                   const FilterState& state, double dt,
                                   double dY, ProjectionKind kind,
                                   MetricMode mode,
                                   const GaussHermiteRule& rule) {
  if (dt < 0.0) throw ConfigError("negative dt");
  if (dt == 0.0) return state;
  const ProjectionFilterCoefficients coeffs = projection_filter_coefficients(
      model, family, state.theta, state.time, kind, mode, rule);
  VectorXd proposal =
      euler_update(state.theta, coeffs.drift, coeffs.diffusion, dt, dY);
  if (proposal[1] > 0.0) {
    return FilterState{proposal, state.time + dt};
  }

  // boundary guard: retry as two half steps with the increment split evenly
  const VectorXd half = euler_update(state.theta, coeffs.drift,
                                     coeffs.diffusion, 0.5 * dt, 0.5 * dY);
  if (half[1] > 0.0) {
    const ProjectionFilterCoefficients mid = projection_filter_coefficients(
        model, family, half, state.time + 0.5 * dt, kind, mode, rule);
    proposal = euler_update(half, mid.drift, mid.diffusion, 0.5 * dt, 0.5 * dY);
    if (proposal[1] > 0.0) {
      return FilterState{proposal, state.time + dt};
    }
  }
  std::ostringstream msg;
  msg << "filter step left the family at t=" << state.time << " (theta = ["
      << state.theta.transpose() << "], dY = " << dY << ")";
  throw BoundaryError(msg.str());
}

FilterState strat_filter_step(const FilterModel& model,
                              const DensityFamily& family,
                              const FilterState& state, double dt, double dY,
                              MetricMode mode, const GaussHermiteRule& rule) {
  return projection_filter_step(model, family, state, dt, dY,
                                ProjectionKind::stratonovich, mode, rule);
}

FilterState ito_vector_filter_step(const FilterModel& model,
                                   const DensityFamily& family,
                                   const FilterState& state, double dt,
                                   double dY, MetricMode mode,
                                   const GaussHermiteRule& rule) {
  return projection_filter_step(model, family, state, dt, dY,
                                ProjectionKind::ito_vector, mode, rule);
}

FilterState ito_jet_filter_step(const FilterModel& model,
                                const DensityFamily& family,
                                const FilterState& state, double dt, double dY,
                                MetricMode mode, const GaussHermiteRule& rule) {
  return projection_filter_step(model, family, state, dt, dY,
                                ProjectionKind::ito_jet, mode, rule);
}

MomentState kalman_step(double beta, double sigma, const MomentState& state,
                        double dt, double dY) {
  MomentState next;
  const double gain = state.var * beta;
  next.mean = state.mean + gain * (dY - beta * state.mean * dt);
  next.var = state.var + (sigma * sigma - gain * gain) * dt;
  return next;
}

namespace {

struct GaussianMoments {
  double Eb = 0.0, Exb = 0.0, Ef = 0.0, Exf = 0.0, Esig2 = 0.0;
};

GaussianMoments adf_moments(const FilterModel& model, double mean, double sd,
                            const GaussHermiteRule& rule, double t) {
  GaussianMoments m;
  static const GaussianFamily family;
  VectorXd theta(2);
  theta << mean, sd;
  const double stretch = std::sqrt(2.0) * sd;
  for (int k = 0; k < rule.nodes.size(); ++k) {
    const double x = mean + stretch * rule.nodes[k];
    const double w = stretch * rule.scaled_weights[k] * family.density(theta, x);
    const double b = model.observation(x, t);
    const double f = model.drift(x, t);
    m.Eb += w * b;
    m.Exb += w * x * b;
    m.Ef += w * f;
    m.Exf += w * x * f;
    m.Esig2 += w * model.diffusion_sq(x, t);
  }
  return m;
}

}  // namespace

MomentState ekf_step(const FilterModel& model, const MomentState& state,
                     double dt, double dY, double t) {
  const double slope = model.observation_dx(state.mean, t);
  const double predicted = model.observation(state.mean, t);
  const double gain = state.var * slope;
  MomentState next;
  next.mean = state.mean + model.drift(state.mean, t) * dt +
              gain * (dY - predicted * dt);
  next.var = state.var + (2.0 * model.drift_dx(state.mean, t) * state.var +
                          model.diffusion_sq(state.mean, t) - gain * gain) *
                             dt;
  if (!(next.var > 0.0)) {
    throw BoundaryError("extended Kalman step lost positive variance");
  }
  return next;
}

MomentState gaussian_adf_step(const FilterModel& model, const MomentState& state,
                              double dt, double dY, const GaussHermiteRule& rule,
                              double t) {
  const double sd = std::sqrt(state.var);
  const GaussianMoments m = adf_moments(model, state.mean, sd, rule, t);
  const double cov_xb = m.Exb - state.mean * m.Eb;
  const double cov_xf = m.Exf - state.mean * m.Ef;
  MomentState next;
  next.mean = state.mean + m.Ef * dt + cov_xb * (dY - m.Eb * dt);
  next.var = state.var + (2.0 * cov_xf + m.Esig2 - cov_xb * cov_xb) * dt;
  if (!(next.var > 0.0)) {
    throw BoundaryError("assumed-density step lost positive variance");
  }
  return next;
}

VectorXd adf_chart_drift(const FilterModel& model, const VectorXd& theta,
                         const GaussHermiteRule& rule, double t) {
  const GaussianMoments m = adf_moments(model, theta[0], theta[1], rule, t);
  const double cov_xb = m.Exb - theta[0] * m.Eb;
  const double cov_xf = m.Exf - theta[0] * m.Ef;
  VectorXd drift(2);
  drift << m.Ef - cov_xb * m.Eb,
      (2.0 * cov_xf + m.Esig2 - cov_xb * cov_xb) / (2.0 * theta[1]);
  return drift;
}

VectorXd ekf_chart_drift(const FilterModel& model, const VectorXd& theta,
                         double t) {
  const double var = theta[1] * theta[1];
  const double slope = model.observation_dx(theta[0], t);
  const double gain = var * slope;
  VectorXd drift(2);
  drift << model.drift(theta[0], t) - gain * model.observation(theta[0], t),
      (2.0 * model.drift_dx(theta[0], t) * var +
       model.diffusion_sq(theta[0], t) - gain * gain) /
          (2.0 * theta[1]);
  return drift;
}

}  // namespace projfilt
