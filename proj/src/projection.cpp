#include "projfilt/projection.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace projfilt {

namespace {

constexpr double kChartFdStep = 1e-5;

void check_noise_metric(const EuclideanNoiseMetric& metric, int m) {
  if (metric.value.rows() != m || metric.value.cols() != m) {
    throw ShapeError("noise metric dimension does not match num_noises");
  }
  if (!metric.value.isApprox(metric.value.transpose(), 1e-12)) {
    throw ShapeError("noise metric must be symmetric");
  }
}

MatrixXd resolve_noise_metric(const EuclideanNoiseMetric& metric, int m) {
  if (metric.value.size() == 0) return MatrixXd::Identity(m, m);
  check_noise_metric(metric, m);
  return metric.value;
}

}  // namespace

MatrixXd project_diffusion(const ItoSde& sde, const Embedding& e,
                           const VectorXd& theta, double t) {
  const VectorXd x = e.value(theta);
  const MatrixXd jac = embedding_jacobian(e, theta);
  const ChartMetric m = metric_tensor(e, theta);
  const MatrixXd ambient = sde.diffusion(x, t);
  return m.inverse * (jac.transpose() * ambient);
}

ProjectedSde stratonovich_projection(const ItoSde& sde, const Embedding& e,
                                     const EuclideanNoiseMetric& noise_metric) {
  resolve_noise_metric(noise_metric, sde.num_noises);  // shape check only
  const StratonovichSde strat = ito_to_stratonovich(sde);

  ProjectedSde out;
  out.kind = ProjectionKind::stratonovich;
  out.chart_sde.dim = e.chart_dim;
  out.chart_sde.num_noises = sde.num_noises;
  out.chart_sde.diffusion = [sde, e](const VectorXd& theta, double t) {
    return project_diffusion(sde, e, theta, t);
  };
  // Chart Stratonovich drift is the projected ambient Stratonovich drift;
  // converting back to Ito needs chart derivatives of B, taken by central
  // differences.
  out.chart_sde.drift = [sde, strat, e](const VectorXd& theta, double t) {
    const VectorXd strat_drift =
        tangent_projection(e, theta, strat.drift(e.value(theta), t));
    const MatrixXd b0 = project_diffusion(sde, e, theta, t);
    VectorXd correction = VectorXd::Zero(e.chart_dim);
    for (int j = 0; j < e.chart_dim; ++j) {
      const double h = kChartFdStep * (1.0 + std::abs(theta[j]));
      VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const MatrixXd db =
          (project_diffusion(sde, e, tp, t) - project_diffusion(sde, e, tm, t)) /
          (2.0 * h);
      correction += db * b0.row(j).transpose();
    }
    return VectorXd(strat_drift + 0.5 * correction);
  };
  return out;
}

ProjectedSde ito_vector_projection(const ItoSde& sde, const Embedding& e,
                                   const EuclideanNoiseMetric& noise_metric) {
  const MatrixXd g = resolve_noise_metric(noise_metric, sde.num_noises);

  ProjectedSde out;
  out.kind = ProjectionKind::ito_vector;
  out.chart_sde.dim = e.chart_dim;
  out.chart_sde.num_noises = sde.num_noises;
  out.chart_sde.diffusion = [sde, e](const VectorXd& theta, double t) {
    return project_diffusion(sde, e, theta, t);
  };
  out.chart_sde.drift = [sde, e, g](const VectorXd& theta, double t) {
    const VectorXd x = e.value(theta);
    const MatrixXd jac = embedding_jacobian(e, theta);
    const ChartMetric metric = metric_tensor(e, theta);
    const MatrixXd b_chart = metric.inverse * (jac.transpose() * sde.diffusion(x, t));
    const std::vector<MatrixXd> d2 = embedding_second_derivative(e, theta);
    VectorXd corrected = sde.drift(x, t);
    for (int alpha = 0; alpha < sde.num_noises; ++alpha) {
      for (int beta = 0; beta < sde.num_noises; ++beta) {
        const double w = g(alpha, beta);
        if (w == 0.0) continue;
        for (int gamma = 0; gamma < e.ambient_dim; ++gamma) {
          corrected[gamma] -=
              0.5 * w *
              b_chart.col(alpha).dot(d2[static_cast<std::size_t>(gamma)] *
                                     b_chart.col(beta));
        }
      }
    }
    return VectorXd(metric.inverse * (jac.transpose() * corrected));
  };
  return out;
}

ProjectedSde ito_jet_projection(const ItoSde& sde, const Embedding& e,
                                const EuclideanNoiseMetric& noise_metric) {
  const MatrixXd g = resolve_noise_metric(noise_metric, sde.num_noises);

  ProjectedSde out;
  out.kind = ProjectionKind::ito_jet;
  out.chart_sde.dim = e.chart_dim;
  out.chart_sde.num_noises = sde.num_noises;
  out.chart_sde.diffusion = [sde, e](const VectorXd& theta, double t) {
    return project_diffusion(sde, e, theta, t);
  };
  // Drift of the closest-point chart image of the ambient solution:
  //   A = P a + 1/2 sum_ab g_ab D2(chart of closest point)(b_a, b_b)
  // assembled from second chart derivatives of the embedding. The normal
  // components of the ambient diffusion enter through the curvature term;
  // tangent components reduce to the Ito-vector correction.
  out.chart_sde.drift = [sde, e, g](const VectorXd& theta, double t) {
    const VectorXd x = e.value(theta);
    const MatrixXd jac = embedding_jacobian(e, theta);
    const ChartMetric metric = metric_tensor(e, theta);
    const MatrixXd ambient_diffusion = sde.diffusion(x, t);
    const MatrixXd b_chart =
        metric.inverse * (jac.transpose() * ambient_diffusion);
    const std::vector<MatrixXd> d2 = embedding_second_derivative(e, theta);

    // normal parts of the ambient diffusion columns contracted with the
    // second derivatives: n x n matrix per noise index
    std::vector<MatrixXd> normal_curvature(
        static_cast<std::size_t>(sde.num_noises));
    for (int alpha = 0; alpha < sde.num_noises; ++alpha) {
      const VectorXd normal =
          ambient_diffusion.col(alpha) - jac * b_chart.col(alpha);
      MatrixXd contracted = MatrixXd::Zero(e.chart_dim, e.chart_dim);
      for (int gamma = 0; gamma < e.ambient_dim; ++gamma) {
        contracted += normal[gamma] * d2[static_cast<std::size_t>(gamma)];
      }
      normal_curvature[static_cast<std::size_t>(alpha)] = contracted;
    }

    VectorXd tangent_part = sde.drift(x, t);
    VectorXd curvature_part = VectorXd::Zero(e.chart_dim);
    for (int alpha = 0; alpha < sde.num_noises; ++alpha) {
      for (int beta = 0; beta < sde.num_noises; ++beta) {
        const double w = g(alpha, beta);
        if (w == 0.0) continue;
        for (int gamma = 0; gamma < e.ambient_dim; ++gamma) {
          tangent_part[gamma] -=
              0.5 * w *
              b_chart.col(alpha).dot(d2[static_cast<std::size_t>(gamma)] *
                                     b_chart.col(beta));
        }
        curvature_part +=
            0.5 * w *
            (normal_curvature[static_cast<std::size_t>(alpha)] *
                 b_chart.col(beta) +
             normal_curvature[static_cast<std::size_t>(beta)] *
                 b_chart.col(alpha));
      }
    }
    return VectorXd(metric.inverse * (jac.transpose() * tangent_part) +
                    metric.inverse * curvature_part);
  };
  return out;
}

VectorXd ito_jet_drift_fd(const ItoSde& sde, const Embedding& e,
                          const VectorXd& theta, double t,
                          const EuclideanNoiseMetric& noise_metric,
                          double step) {
  const MatrixXd g = resolve_noise_metric(noise_metric, sde.num_noises);
  const VectorXd x = e.value(theta);
  MetricProjectionOptions opts;
  opts.tolerance = 1e-13;
  opts.max_iterations = 200;
  const auto chart_of_closest = [&](const VectorXd& point) {
    return metric_projection(e, point, theta, opts);
  };

  const int r = e.ambient_dim;
  const int n = e.chart_dim;
  MatrixXd first(n, r);
  std::vector<std::vector<VectorXd>> second(
      static_cast<std::size_t>(r),
      std::vector<VectorXd>(static_cast<std::size_t>(r)));
  const VectorXd base = chart_of_closest(x);
  for (int gamma = 0; gamma < r; ++gamma) {
    VectorXd xp = x, xm = x;
    xp[gamma] += step;
    xm[gamma] -= step;
    const VectorXd fp = chart_of_closest(xp);
    const VectorXd fm = chart_of_closest(xm);
    first.col(gamma) = (fp - fm) / (2.0 * step);
    second[static_cast<std::size_t>(gamma)][static_cast<std::size_t>(gamma)] =
        (fp - 2.0 * base + fm) / (step * step);
    for (int delta = gamma + 1; delta < r; ++delta) {
      VectorXd pp = x, pm = x, mp = x, mm = x;
      pp[gamma] += step; pp[delta] += step;
      pm[gamma] += step; pm[delta] -= step;
      mp[gamma] -= step; mp[delta] += step;
      mm[gamma] -= step; mm[delta] -= step;
      const VectorXd mixed = (chart_of_closest(pp) - chart_of_closest(pm) -
                              chart_of_closest(mp) + chart_of_closest(mm)) /
                             (4.0 * step * step);
      second[static_cast<std::size_t>(gamma)][static_cast<std::size_t>(delta)] =
          mixed;
      second[static_cast<std::size_t>(delta)][static_cast<std::size_t>(gamma)] =
          mixed;
    }
  }

  const MatrixXd diffusion = sde.diffusion(x, t);
  VectorXd drift = first * sde.drift(x, t);
  for (int alpha = 0; alpha < sde.num_noises; ++alpha) {
    for (int beta = 0; beta < sde.num_noises; ++beta) {
      const double w = g(alpha, beta);
      if (w == 0.0) continue;
      for (int gamma = 0; gamma < r; ++gamma) {
        for (int delta = 0; delta < r; ++delta) {
          drift += 0.5 * w * diffusion(gamma, alpha) * diffusion(delta, beta) *
                   second[static_cast<std::size_t>(gamma)]
                         [static_cast<std::size_t>(delta)];
        }
      }
    }
  }
  return drift;
}

namespace {

ProjectedSde make_projection(const ItoSde& sde, const Embedding& e,
                             ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::stratonovich:
      return stratonovich_projection(sde, e);
    case ProjectionKind::ito_vector:
      return ito_vector_projection(sde, e);
    case ProjectionKind::ito_jet:
      return ito_jet_projection(sde, e);
  }
  throw ConfigError("unknown projection kind");
}

CriterionTable finalize_table(const std::vector<double>& horizons,
                              std::vector<double> errors) {
  CriterionTable table;
  table.errors = std::move(errors);
  bool degenerate = true;
  for (double err : table.errors) {
    if (std::abs(err) > 1e-18) degenerate = false;
  }
  table.degenerate = degenerate;
  if (degenerate) {
    table.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<double> clipped = table.errors;
    for (double& err : clipped) err = std::max(err, 1e-300);
    table.slope = log_log_slope(horizons, clipped);
  }
  return table;
}

}  // namespace

OrderProbeResult order_probe_all(const ItoSde& sde, const Embedding& e,
                                 ProjectionKind kind, const VectorXd& theta0,
                                 const OrderProbeConfig& config) {
  if (config.horizons.empty()) throw ConfigError("probe needs horizons");
  if (config.trials <= 0) throw ConfigError("probe needs trials");

  const ProjectedSde projected = make_projection(sde, e, kind);
  const VectorXd x0 = e.value(theta0);
  const int m = sde.num_noises;
  const std::size_t n_h = config.horizons.size();

  OrderProbeResult result;
  result.horizons = config.horizons;
  std::vector<double> strong(n_h, 0.0);
  std::vector<double> metric_strong(n_h, 0.0);
  std::vector<VectorXd> mean_gap(n_h, VectorXd::Zero(sde.dim));
  std::vector<VectorXd> mean_gap_sq(n_h, VectorXd::Zero(sde.dim));
  std::vector<long> counted(n_h, 0);

  for (std::size_t hi = 0; hi < n_h; ++hi) {
    const double horizon = config.horizons[hi];
    const double dt = horizon / config.substeps;
    const double sqrt_dt = std::sqrt(dt);

    for (int trial = 0; trial < config.trials; ++trial) {
      const CounterRng rng = CounterRng::derive(
          config.seed, (static_cast<std::uint64_t>(hi) << 32) +
                           static_cast<std::uint64_t>(trial));
      VectorXd x = x0;
      VectorXd y = theta0;
      bool ok = true;
      try {
        for (int k = 0; k < config.substeps; ++k) {
          VectorXd dW(m);
          for (int alpha = 0; alpha < m; ++alpha) {
            dW[alpha] = sqrt_dt * rng.normal(static_cast<std::uint64_t>(
                                      k * m + alpha));
          }
          const double t = k * dt;
          x = euler_maruyama_step(sde, x, t, dt, dW);
          y = euler_maruyama_step(projected.chart_sde, y, t, dt, dW);
        }
        const VectorXd image = e.value(y);
        const VectorXd gap = x - image;
        const VectorXd closest = e.value(metric_projection(e, x, y));
        strong[hi] += gap.squaredNorm();
        metric_strong[hi] += (closest - image).squaredNorm();
        mean_gap[hi] += gap;
        mean_gap_sq[hi] += gap.cwiseProduct(gap);
        ++counted[hi];
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) ++result.discarded;
    }
  }

  const long total = static_cast<long>(n_h) * config.trials;
  if (result.discarded > config.max_discard_fraction * total) {
    std::ostringstream msg;
    msg << "order probe discarded " << result.discarded << " of " << total
        << " trials";
    throw ProbeInvalidError(msg.str());
  }

  std::vector<double> strong_avg(n_h), metric_avg(n_h), weak(n_h);
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    const double n_trials = static_cast<double>(counted[hi]);
    strong_avg[hi] = strong[hi] / n_trials;
    metric_avg[hi] = metric_strong[hi] / n_trials;
    const VectorXd mean = mean_gap[hi] / n_trials;
    // squared norm of the mean gap, debiased by the Monte Carlo variance of
    // the mean estimate
    const VectorXd var =
        (mean_gap_sq[hi] / n_trials - mean.cwiseProduct(mean)) / n_trials;
    weak[hi] = std::max(mean.squaredNorm() - var.sum(), 0.0);
  }

  result.strong_ambient = finalize_table(result.horizons, strong_avg);
  result.strong_metric_projection = finalize_table(result.horizons, metric_avg);
  result.weak_ambient = finalize_table(result.horizons, weak);
  return result;
}

CriterionTable order_probe(const ItoSde& sde, const Embedding& e,
                           ProjectionKind kind, ProbeCriterion criterion,
                           const VectorXd& theta0,
                           const OrderProbeConfig& config) {
  const OrderProbeResult all = order_probe_all(sde, e, kind, theta0, config);
  switch (criterion) {
    case ProbeCriterion::strong_ambient:
      return all.strong_ambient;
    case ProbeCriterion::weak_ambient:
      return all.weak_ambient;
    case ProbeCriterion::strong_metric_projection:
      return all.strong_metric_projection;
  }
  throw ConfigError("unknown probe criterion");
}

}  // namespace projfilt
