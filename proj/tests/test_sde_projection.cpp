#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "projfilt/embeddings.hpp"
#include "projfilt/projection.hpp"
#include "projfilt/rng.hpp"

using namespace projfilt;

namespace {

VectorXd make_theta(double value) {
  VectorXd theta(1);
  theta << value;
  return theta;
}

ItoSde planar_sde(std::function<VectorXd(const VectorXd&)> drift,
                  std::function<MatrixXd(const VectorXd&)> diffusion,
                  int num_noises) {
  ItoSde sde;
  sde.dim = 2;
  sde.num_noises = num_noises;
  sde.drift = [drift](const VectorXd& x, double) { return drift(x); };
  sde.diffusion = [diffusion](const VectorXd& x, double) { return diffusion(x); };
  return sde;
}

ItoSde circle_test_sde() {
  return planar_sde([](const VectorXd&) { return VectorXd::Zero(2); },
                    [](const VectorXd&) { return MatrixXd::Identity(2, 2); },
                    2);
}

bool bitwise_equal(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("projected diffusion: tangent, normal and mixed fields") {
  const Embedding circle = circle_embedding();
  const VectorXd theta = make_theta(0.9);
  const MatrixXd jac = embedding_jacobian(circle, theta);

  // tangent field b = phi_* u comes back as u
  const double u = 1.7;
  ItoSde tangent = planar_sde(
      [](const VectorXd&) { return VectorXd::Zero(2); },
      [jac, u](const VectorXd&) { return MatrixXd(jac * u); }, 1);
  CHECK(project_diffusion(tangent, circle, theta, 0.0)(0, 0) ==
        doctest::Approx(u).epsilon(1e-12));

  // normal field projects to zero
  const VectorXd normal_dir = circle.value(theta);
  ItoSde normal = planar_sde(
      [](const VectorXd&) { return VectorXd::Zero(2); },
      [normal_dir](const VectorXd&) { return MatrixXd(normal_dir * 0.8); }, 1);
  CHECK(std::abs(project_diffusion(normal, circle, theta, 0.0)(0, 0)) < 1e-12);

  // identity diffusion at theta = 0 projects to the row [0, 1]
  const MatrixXd projected =
      project_diffusion(circle_test_sde(), circle, make_theta(0.0), 0.0);
  CHECK(projected(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(projected(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diffusion coefficient is the same code path for all kinds") {
  const Embedding ellipse = ellipse_embedding(1.8, 0.7);
  ItoSde sde = planar_sde(
      [](const VectorXd& x) {
        VectorXd a(2);
        a << -x[1], 0.5 * x[0];
        return a;
      },
      [](const VectorXd& x) {
        MatrixXd b(2, 2);
        b << 1.0, 0.3 * x[0], -0.2, 0.9 + 0.1 * x[1];
        return b;
      },
      2);
  const ProjectedSde strat = stratonovich_projection(sde, ellipse);
  const ProjectedSde vec = ito_vector_projection(sde, ellipse);
  const ProjectedSde jet = ito_jet_projection(sde, ellipse);
  const CounterRng rng = CounterRng::derive(21, 0);
  for (int i = 0; i < 20; ++i) {
    const VectorXd theta = make_theta(6.28 * (rng.uniform(2 * i) - 0.5));
    const double t = rng.uniform(2 * i + 1);
    const MatrixXd b_strat = strat.chart_sde.diffusion(theta, t);
    const MatrixXd b_vec = vec.chart_sde.diffusion(theta, t);
    const MatrixXd b_jet = jet.chart_sde.diffusion(theta, t);
    CHECK(bitwise_equal(b_strat, b_vec));
    CHECK(bitwise_equal(b_strat, b_jet));
  }
}

TEST_CASE("all three drifts coincide for noiseless dynamics") {
  const Embedding ellipse = ellipse_embedding(1.2, 2.0);
  ItoSde sde = planar_sde(
      [](const VectorXd& x) {
        VectorXd a(2);
        a << std::sin(x[0]), x[1] - 0.3;
        return a;
      },
      [](const VectorXd&) { return MatrixXd::Zero(2, 1); }, 1);
  const ProjectedSde strat = stratonovich_projection(sde, ellipse);
  const ProjectedSde vec = ito_vector_projection(sde, ellipse);
  const ProjectedSde jet = ito_jet_projection(sde, ellipse);
  const CounterRng rng = CounterRng::derive(22, 0);
  for (int i = 0; i < 10; ++i) {
    const VectorXd theta = make_theta(6.0 * (rng.uniform(i) - 0.5));
    const VectorXd a_strat = strat.chart_sde.drift(theta, 0.0);
    const VectorXd a_vec = vec.chart_sde.drift(theta, 0.0);
    const VectorXd a_jet = jet.chart_sde.drift(theta, 0.0);
    CHECK((a_strat - a_vec).norm() < 1e-10);
    CHECK((a_vec - a_jet).norm() < 1e-10);
  }
}

TEST_CASE("affine embeddings kill every curvature term") {
  MatrixXd basis(2, 1);
  basis << 1.0, -0.6;
  VectorXd offset(2);
  offset << 0.2, 1.0;
  const Embedding line = affine_embedding(basis, offset);
  ItoSde sde = planar_sde(
      [](const VectorXd& x) {
        VectorXd a(2);
        a << x[1], 1.0 - x[0];
        return a;
      },
      [](const VectorXd& x) {
        MatrixXd b(2, 2);
        b << 0.5, 0.1 * x[0], 0.2 * x[1], 1.1;
        return b;
      },
      2);
  const ProjectedSde vec = ito_vector_projection(sde, line);
  const ProjectedSde jet = ito_jet_projection(sde, line);
  const CounterRng rng = CounterRng::derive(23, 0);
  for (int i = 0; i < 10; ++i) {
    const VectorXd theta = make_theta(3.0 * (rng.uniform(i) - 0.5));
    const VectorXd a_vec = vec.chart_sde.drift(theta, 0.0);
    const VectorXd a_jet = jet.chart_sde.drift(theta, 0.0);
    // both reduce to the plain tangent projection of the ambient drift
    const VectorXd plain =
        tangent_projection(line, theta, sde.drift(line.value(theta), 0.0));
    CHECK((a_vec - plain).norm() < 1e-10);
    CHECK((a_jet - plain).norm() < 1e-10);
  }
}

TEST_CASE("circle with identity noise: flat drift for vector and jet") {
  const Embedding circle = circle_embedding();
  const ItoSde sde = circle_test_sde();
  const ProjectedSde vec = ito_vector_projection(sde, circle);
  const ProjectedSde jet = ito_jet_projection(sde, circle);
  // the chart image of the ambient solution is atan2, which is harmonic,
  // so the drift vanishes everywhere on the circle
  for (double angle : {0.0, 0.5, 2.0, -2.4}) {
    CHECK(std::abs(vec.chart_sde.drift(make_theta(angle), 0.0)[0]) < 1e-12);
    CHECK(std::abs(jet.chart_sde.drift(make_theta(angle), 0.0)[0]) < 1e-12);
  }
}

TEST_CASE("additive ambient noise keeps the Stratonovich drift plain") {
  const Embedding circle = circle_embedding();
  ItoSde sde = planar_sde(
      [](const VectorXd& x) {
        VectorXd a(2);
        a << -0.4 * x[1], 0.3;
        return a;
      },
      [](const VectorXd&) {
        MatrixXd b(2, 2);
        b << 0.7, 0.1, -0.2, 0.5;
        return b;
      },
      2);
  const ProjectedSde strat = stratonovich_projection(sde, circle);
  for (double angle : {0.1, 1.3, -0.8}) {
    const VectorXd theta = make_theta(angle);
    // constant b: the ambient Stratonovich drift equals the Ito drift, so
    // the chart drift minus the chart conversion term is plain projection
    const VectorXd plain =
        tangent_projection(circle, theta, sde.drift(circle.value(theta), 0.0));
    const MatrixXd b0 = strat.chart_sde.diffusion(theta, 0.0);
    // chart conversion term recomputed here by finite differences
    VectorXd conversion = VectorXd::Zero(1);
    const double h = 1e-5 * (1.0 + std::abs(angle));
    const MatrixXd bp = strat.chart_sde.diffusion(make_theta(angle + h), 0.0);
    const MatrixXd bm = strat.chart_sde.diffusion(make_theta(angle - h), 0.0);
    conversion += ((bp - bm) / (2.0 * h)) * b0.row(0).transpose();
    const VectorXd drift = strat.chart_sde.drift(theta, 0.0);
    CHECK(std::abs(drift[0] - plain[0] - 0.5 * conversion[0]) < 1e-8);
  }
}

TEST_CASE("tangent SDE on an affine manifold is reproduced pathwise") {
  MatrixXd basis(2, 1);
  basis << 1.0, 2.0;
  VectorXd offset(2);
  offset << 0.0, 1.0;
  const Embedding line = affine_embedding(basis, offset);

  // ambient coefficients live in the tangent direction
  ItoSde sde = planar_sde(
      [basis](const VectorXd& x) {
        return VectorXd(basis * std::sin(x[0] + x[1]));
      },
      [basis](const VectorXd& x) {
        return MatrixXd(basis * (0.3 + 0.1 * std::cos(x[1])));
      },
      1);

  const VectorXd theta0 = make_theta(0.2);
  const VectorXd x0 = line.value(theta0);
  const double dt = 1e-3;
  const SamplePath ambient = simulate_path(sde, x0, 0.5, dt, 31);

  const ProjectedSde strat = stratonovich_projection(sde, line);
  VectorXd y = theta0;
  double worst = 0.0;
  for (int k = 0; k < ambient.increments.cols(); ++k) {
    y = euler_maruyama_step(strat.chart_sde, y, ambient.times[k], dt,
                            ambient.increments.col(k));
    worst = std::max(worst,
                     (line.value(y) - ambient.states.col(k + 1)).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("jet drift agrees with the finite-difference closest-point route") {
  const CounterRng rng = CounterRng::derive(29, 0);
  int draw = 0;
  for (const Embedding& e :
       {circle_embedding(), ellipse_embedding(1.6, 0.9)}) {
    for (int i = 0; i < 25; ++i) {
      const double c0 = 2.0 * (rng.uniform(6 * draw) - 0.5);
      const double c1 = 2.0 * (rng.uniform(6 * draw + 1) - 0.5);
      const double c2 = 2.0 * (rng.uniform(6 * draw + 2) - 0.5);
      const double c3 = 2.0 * (rng.uniform(6 * draw + 3) - 0.5);
      const double c4 = 2.0 * (rng.uniform(6 * draw + 4) - 0.5);
      ItoSde sde = planar_sde(
          [c0, c1](const VectorXd& x) {
            VectorXd a(2);
            a << c0 + 0.3 * x[1], c1 - 0.2 * x[0];
            return a;
          },
          [c2, c3, c4](const VectorXd& x) {
            MatrixXd b(2, 2);
            b << c2, 0.4 * c3, c4 + 0.1 * std::sin(x[0]), 0.8;
            return b;
          },
          2);
      const VectorXd theta = make_theta(6.0 * (rng.uniform(6 * draw + 5) - 0.5));
      const ProjectedSde jet = ito_jet_projection(sde, e);
      const VectorXd closed = jet.chart_sde.drift(theta, 0.0);
      const VectorXd finite = ito_jet_drift_fd(sde, e, theta, 0.0);
      CHECK((closed - finite).norm() < 1e-4);
      ++draw;
    }
  }
}

TEST_CASE("order probe flags exact projections as degenerate") {
  MatrixXd basis(2, 1);
  basis << 1.0, 0.5;
  const Embedding line = affine_embedding(basis, VectorXd::Zero(2));
  ItoSde sde = planar_sde(
      [basis](const VectorXd&) { return VectorXd(basis * 0.2); },
      [basis](const VectorXd&) { return MatrixXd(basis * 0.6); }, 1);
  OrderProbeConfig config;
  config.horizons = {0.0625, 0.03125, 0.015625};
  config.trials = 200;
  config.substeps = 16;
  config.seed = 5;
  const CriterionTable table =
      order_probe(sde, line, ProjectionKind::ito_jet,
                  ProbeCriterion::strong_metric_projection, make_theta(0.0),
                  config);
  CHECK(table.degenerate);
  CHECK(std::isnan(table.slope));
}

TEST_CASE("order probe recovers the expected trends at desk scale") {
  const Embedding circle = circle_embedding();
  const ItoSde sde = circle_test_sde();
  OrderProbeConfig config;
  config.horizons = {0.0625, 0.03125, 0.015625, 0.0078125};
  config.trials = 4000;
  config.substeps = 64;
  config.seed = 17;

  const OrderProbeResult jet = order_probe_all(
      sde, circle, ProjectionKind::ito_jet, make_theta(0.0), config);
  CHECK(jet.discarded == 0);
  CHECK(jet.strong_metric_projection.slope > 1.6);
  CHECK(jet.strong_ambient.slope == doctest::Approx(1.0).epsilon(0.25));
}
