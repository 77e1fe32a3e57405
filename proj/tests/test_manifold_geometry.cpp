#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "projfilt/embedding.hpp"
#include "projfilt/embeddings.hpp"
#include "projfilt/rng.hpp"

using namespace projfilt;

namespace {

VectorXd make_theta(double value) {
  VectorXd theta(1);
  theta << value;
  return theta;
}

// strip the analytic derivatives so the central-difference fallbacks kick in
Embedding value_only(const Embedding& e) {
  Embedding out = e;
  out.jacobian = nullptr;
  out.second_derivative = nullptr;
  return out;
}

// dense scan oracle: closest angle on the circle by brute force
double circle_scan_oracle(const VectorXd& x) {
  double best_theta = 0.0;
  double best = 1e300;
  const int n = 2000000;
  for (int i = 0; i < n; ++i) {
    const double theta = -3.14159265358979 + 2.0 * 3.14159265358979 * i / n;
    const double dx = x[0] - std::cos(theta);
    const double dy = x[1] - std::sin(theta);
    const double d2 = dx * dx + dy * dy;
    if (d2 < best) {
      best = d2;
      best_theta = theta;
    }
  }
  return best_theta;
}

}  // namespace

TEST_CASE("unit circle is a unit-speed curve") {
  const Embedding circle = circle_embedding();
  for (double angle : {0.0, 0.7, 2.5, -1.2}) {
    const ChartMetric m = metric_tensor(circle, make_theta(angle));
    CHECK(m.value(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.inverse(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ellipse metric at the top of the minor axis") {
  const Embedding ellipse = ellipse_embedding(2.0, 1.0);
  const ChartMetric m = metric_tensor(ellipse, make_theta(1.5707963267948966));
  CHECK(m.value(0, 0) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("analytic and finite-difference Jacobians agree on the metric") {
  const Embedding ellipse = ellipse_embedding(1.7, 0.6);
  const Embedding fallback = value_only(ellipse);
  const CounterRng rng = CounterRng::derive(3, 0);
  for (int i = 0; i < 20; ++i) {
    const VectorXd theta = make_theta(6.28 * (rng.uniform(i) - 0.5));
    const ChartMetric analytic = metric_tensor(ellipse, theta);
    const ChartMetric fd = metric_tensor(fallback, theta);
    CHECK(std::abs(analytic.value(0, 0) - fd.value(0, 0)) < 1e-6);
  }
}

TEST_CASE("tangent projection on the circle") {
  const Embedding circle = circle_embedding();
  const VectorXd theta = make_theta(0.0);
  VectorXd v(2);

  v << 3.0, 2.0;  // tangent at (1,0) is (0,1)
  CHECK(tangent_projection(circle, theta, v)[0] ==
        doctest::Approx(2.0).epsilon(1e-12));

  v << 3.0, 0.0;  // purely normal
  CHECK(tangent_projection(circle, theta, v)[0] ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tangent projection is a left inverse of the pushforward") {
  const Embedding ellipse = ellipse_embedding(1.3, 2.2);
  const CounterRng rng = CounterRng::derive(5, 0);
  for (int i = 0; i < 20; ++i) {
    const VectorXd theta = make_theta(6.28 * (rng.uniform(2 * i) - 0.5));
    VectorXd u(1);
    u << 4.0 * (rng.uniform(2 * i + 1) - 0.5);
    const VectorXd pushed = embedding_jacobian(ellipse, theta) * u;
    CHECK(std::abs(tangent_projection(ellipse, theta, pushed)[0] - u[0]) <
          1e-10);
  }
}

TEST_CASE("ambient projector is an orthogonal projection") {
  const Embedding ellipse = ellipse_embedding(2.0, 0.8);
  const CounterRng rng = CounterRng::derive(6, 0);
  for (int i = 0; i < 10; ++i) {
    const VectorXd theta = make_theta(6.28 * (rng.uniform(i) - 0.5));
    const MatrixXd proj = ambient_projector(ellipse, theta);
    CHECK((proj * proj - proj).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((proj - proj.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("closest point on the circle") {
  const Embedding circle = circle_embedding();
  VectorXd x(2);

  x << 2.0, 0.0;
  CHECK(std::abs(metric_projection(circle, x, make_theta(0.1))[0]) < 1e-9);

  x << 3.0, 4.0;
  const double found = metric_projection(circle, x, make_theta(0.9))[0];
  CHECK(found == doctest::Approx(std::atan2(4.0, 3.0)).epsilon(1e-9));
  // brute-force scan agrees
  CHECK(std::abs(found - circle_scan_oracle(x)) < 1e-5);
}

TEST_CASE("center of the circle is rejected") {
  const Embedding circle = circle_embedding();
  const VectorXd x = VectorXd::Zero(2);
  CHECK_THROWS_AS(metric_projection(circle, x, make_theta(0.3)),
                  OutsideTubularNeighborhoodError);
}

TEST_CASE("points on the manifold are fixed points") {
  const Embedding ellipse = ellipse_embedding(1.5, 0.9);
  const CounterRng rng = CounterRng::derive(8, 0);
  for (int i = 0; i < 10; ++i) {
    const VectorXd theta = make_theta(6.0 * (rng.uniform(i) - 0.5));
    const VectorXd projected =
        metric_projection(ellipse, ellipse.value(theta), theta);
    CHECK(std::abs(projected[0] - theta[0]) < 1e-9);
  }
}

TEST_CASE("differential of the closest-point map is the tangent projection") {
  const Embedding circle = circle_embedding();
  const VectorXd theta = make_theta(0.6);
  const VectorXd base = circle.value(theta);
  VectorXd v(2);
  v << 0.8, -0.4;
  const double tangent = tangent_projection(circle, theta, v)[0];
  double finer = 0.0;
  for (double h : {1e-3, 1e-4}) {
    const VectorXd moved = base + h * v;
    const double finite =
        (metric_projection(circle, moved, theta)[0] - theta[0]) / h;
    CHECK(std::abs(finite - tangent) < 1e-3);
    finer = finite;
  }
  CHECK(std::abs(finer - tangent) < 1e-4);
}

TEST_CASE("hessian contraction") {
  MatrixXd basis(2, 1);
  basis << 1.0, 2.0;
  const Embedding line = affine_embedding(basis, VectorXd::Zero(2));
  VectorXd u(1), v(1);
  u << 1.3;
  v << -0.7;
  CHECK(hessian_contraction(line, make_theta(0.4), u, v).norm() == 0.0);

  const Embedding circle = circle_embedding();
  u << 1.0;
  v << 1.0;
  const VectorXd curved = hessian_contraction(circle, make_theta(0.0), u, v);
  CHECK(curved[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(curved[1] == doctest::Approx(0.0).epsilon(1e-12));

  // symmetry in the two chart arguments
  const Embedding ellipse = ellipse_embedding(1.4, 2.1);
  const CounterRng rng = CounterRng::derive(9, 0);
  for (int i = 0; i < 10; ++i) {
    const VectorXd theta = make_theta(6.0 * (rng.uniform(3 * i) - 0.5));
    u << rng.uniform(3 * i + 1) - 0.5;
    v << rng.uniform(3 * i + 2) - 0.5;
    const VectorXd uv = hessian_contraction(ellipse, theta, u, v);
    const VectorXd vu = hessian_contraction(ellipse, theta, v, u);
    CHECK((uv - vu).norm() < 1e-14);
  }
}

TEST_CASE("degenerate chart is reported") {
  // the immersion collapses at theta = 0
  Embedding degenerate;
  degenerate.chart_dim = 1;
  degenerate.ambient_dim = 2;
  degenerate.value = [](const VectorXd& theta) {
    VectorXd out(2);
    out << theta[0] * theta[0] * theta[0], 0.0;
    return out;
  };
  degenerate.jacobian = [](const VectorXd& theta) {
    MatrixXd jac(2, 1);
    jac << 3.0 * theta[0] * theta[0], 0.0;
    return jac;
  };
  CHECK_THROWS_AS(metric_tensor(degenerate, make_theta(0.0)),
                  DegenerateChartError);
}
