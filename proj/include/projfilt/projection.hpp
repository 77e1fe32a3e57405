#pragma once

#include <optional>
#include <vector>

#include "projfilt/embedding.hpp"
#include "projfilt/sde.hpp"

namespace projfilt {

/// Inner product on the driving noise space; identity for independent
/// Brownian motions.
struct EuclideanNoiseMetric {
  MatrixXd value;
  static EuclideanNoiseMetric identity(int m) {
    return EuclideanNoiseMetric{MatrixXd::Identity(m, m)};
  }
};

enum class ProjectionKind { stratonovich, ito_vector, ito_jet };

/// Chart-coordinate SDE approximating an ambient SDE on an embedded
/// submanifold. The chart SDE is stored in Ito form for every kind; the
/// Stratonovich kind is converted before simulation.
struct ProjectedSde {
  ProjectionKind kind;
  ItoSde chart_sde;
};

/// Diffusion coefficient shared by all three projections: column alpha is
/// the tangent projection of the ambient diffusion column at phi(theta).
MatrixXd project_diffusion(const ItoSde& sde, const Embedding& e,
                           const VectorXd& theta, double t);

ProjectedSde stratonovich_projection(
    const ItoSde& sde, const Embedding& e,
    const EuclideanNoiseMetric& noise_metric = {});

ProjectedSde ito_vector_projection(
    const ItoSde& sde, const Embedding& e,
    const EuclideanNoiseMetric& noise_metric = {});

ProjectedSde ito_jet_projection(const ItoSde& sde, const Embedding& e,
                                const EuclideanNoiseMetric& noise_metric = {});

/// Independent evaluation of the Ito-jet drift: differentiates the
/// closest-point chart map around phi(theta) by finite differences and
/// assembles the Ito drift of its image process. Slow; used to cross-check
/// the closed-form assembly.
VectorXd ito_jet_drift_fd(const ItoSde& sde, const Embedding& e,
                          const VectorXd& theta, double t,
                          const EuclideanNoiseMetric& noise_metric = {},
                          double step = 1e-3);

enum class ProbeCriterion { strong_ambient, weak_ambient, strong_metric_projection };

struct OrderProbeConfig {
  std::vector<double> horizons;
  int trials = 100000;
  int substeps = 64;  // integrator steps per horizon
  std::uint64_t seed = 1;
  double max_discard_fraction = 0.01;
};

struct CriterionTable {
  std::vector<double> errors;  // one per horizon
  double slope = 0.0;          // log-log least squares
  bool degenerate = false;     // errors at machine-noise level
};

struct OrderProbeResult {
  std::vector<double> horizons;
  CriterionTable strong_ambient;
  CriterionTable weak_ambient;  // squared norm of the mean gap, debiased
  CriterionTable strong_metric_projection;
  long discarded = 0;
};

/// Monte Carlo estimate of the projection error under all three criteria,
/// with the ambient and chart processes driven by the same increments.
/// theta0 must satisfy X0 = phi(theta0).
OrderProbeResult order_probe_all(const ItoSde& sde, const Embedding& e,
                                 ProjectionKind kind, const VectorXd& theta0,
                                 const OrderProbeConfig& config);

/// Single-criterion view of order_probe_all.
CriterionTable order_probe(const ItoSde& sde, const Embedding& e,
                           ProjectionKind kind, ProbeCriterion criterion,
                           const VectorXd& theta0,
                           const OrderProbeConfig& config);

}  // namespace projfilt
