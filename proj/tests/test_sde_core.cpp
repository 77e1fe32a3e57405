#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "projfilt/rng.hpp"
#include "projfilt/sde.hpp"

using namespace projfilt;

namespace {

ItoSde scalar_sde(std::function<double(double)> drift,
                  std::function<double(double)> diffusion) {
  ItoSde sde;
  sde.dim = 1;
  sde.num_noises = 1;
  sde.drift = [drift](const VectorXd& x, double) {
    VectorXd out(1);
    out << drift(x[0]);
    return out;
  };
  sde.diffusion = [diffusion](const VectorXd& x, double) {
    MatrixXd out(1, 1);
    out << diffusion(x[0]);
    return out;
  };
  return sde;
}

// test-side derivative oracle, independent of the library's fallback step
double derivative_oracle(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * (1.0 + std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("constant diffusion leaves the drift unchanged") {
  ItoSde sde = scalar_sde([](double x) { return 2.0 * x; },
                          [](double) { return 0.7; });
  const StratonovichSde strat = ito_to_stratonovich(sde);
  VectorXd x(1);
  for (double value : {-2.0, 0.0, 1.5}) {
    x << value;
    CHECK(strat.drift(x, 0.0)[0] == doctest::Approx(2.0 * value).epsilon(1e-12));
  }
}

TEST_CASE("linear diffusion picks up the expected correction") {
  // a = 0, b(x) = x: the Stratonovich drift is -x/2
  ItoSde sde = scalar_sde([](double) { return 0.0; },
                          [](double x) { return x; });
  const StratonovichSde strat = ito_to_stratonovich(sde);
  VectorXd x(1);
  x << 3.0;
  CHECK(strat.drift(x, 0.0)[0] == doctest::Approx(-1.5).epsilon(1e-6));

  // reverse direction: Stratonovich drift 0 gains +x/2
  StratonovichSde back;
  back.dim = 1;
  back.num_noises = 1;
  back.drift = [](const VectorXd&, double) { return VectorXd::Zero(1); };
  back.diffusion = sde.diffusion;
  const ItoSde ito = stratonovich_to_ito(back);
  CHECK(ito.drift(x, 0.0)[0] == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("conversion agrees with a test-side derivative oracle") {
  const auto b = [](double x) { return std::sin(x) + 2.0; };
  ItoSde sde = scalar_sde([](double x) { return -x; }, b);
  const StratonovichSde strat = ito_to_stratonovich(sde);
  VectorXd x(1);
  const CounterRng rng = CounterRng::derive(7, 0);
  for (int i = 0; i < 25; ++i) {
    const double value = 3.0 * (rng.uniform(i) - 0.5);
    x << value;
    const double expected =
        -value - 0.5 * derivative_oracle(b, value) * b(value);
    CHECK(strat.drift(x, 0.0)[0] == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("round trip restores the drift") {
  // analytic Jacobian supplied: round trip is exact
  ItoSde sde;
  sde.dim = 2;
  sde.num_noises = 2;
  sde.drift = [](const VectorXd& x, double) {
    VectorXd out(2);
    out << std::cos(x[1]), x[0] - x[1];
    return out;
  };
  sde.diffusion = [](const VectorXd& x, double) {
    MatrixXd out(2, 2);
    out << 1.0 + 0.1 * x[0], 0.2, 0.3 * x[1], 0.5;
    return out;
  };
  sde.diffusion_jacobian = [](const VectorXd&, double) {
    std::vector<MatrixXd> jac(2, MatrixXd::Zero(2, 2));
    jac[0](0, 0) = 0.1;
    jac[0](1, 1) = 0.3;
    return jac;
  };

  const ItoSde round = stratonovich_to_ito(ito_to_stratonovich(sde));
  const CounterRng rng = CounterRng::derive(11, 0);
  VectorXd x(2);
  for (int i = 0; i < 100; ++i) {
    x << 4.0 * (rng.uniform(2 * i) - 0.5), 4.0 * (rng.uniform(2 * i + 1) - 0.5);
    const VectorXd original = sde.drift(x, 0.0);
    const VectorXd recovered = round.drift(x, 0.0);
    CHECK((original - recovered).norm() < 1e-12);
  }

  // finite-difference fallback: round trip within 1e-8
  ItoSde no_jacobian = sde;
  no_jacobian.diffusion_jacobian = nullptr;
  const ItoSde round_fd = stratonovich_to_ito(ito_to_stratonovich(no_jacobian));
  for (int i = 0; i < 100; ++i) {
    x << 4.0 * (rng.uniform(500 + 2 * i) - 0.5),
        4.0 * (rng.uniform(500 + 2 * i + 1) - 0.5);
    CHECK((sde.drift(x, 0.0) - round_fd.drift(x, 0.0)).norm() < 1e-8);
  }
}

TEST_CASE("euler step handles the trivial cases") {
  VectorXd x(1);
  x << 1.0;
  VectorXd dW(1);

  ItoSde still = scalar_sde([](double) { return 0.0; },
                            [](double) { return 0.0; });
  dW << 0.4;
  CHECK(euler_maruyama_step(still, x, 0.0, 0.1, dW)[0] == 1.0);

  ItoSde drift_only = scalar_sde([](double) { return 1.0; },
                                 [](double) { return 0.0; });
  CHECK(euler_maruyama_step(drift_only, x, 0.0, 0.1, dW)[0] ==
        doctest::Approx(1.1).epsilon(1e-15));

  ItoSde noise_only = scalar_sde([](double) { return 0.0; },
                                 [](double) { return 1.0; });
  dW << 0.3;
  CHECK(euler_maruyama_step(noise_only, x, 0.0, 0.1, dW)[0] ==
        doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("divergence raises with step context") {
  ItoSde bad = scalar_sde([](double x) { return 1.0 / x; },
                          [](double) { return 0.0; });
  VectorXd x(1);
  x << 0.0;
  VectorXd dW(1);
  dW << 0.0;
  CHECK_THROWS_AS(euler_maruyama_step(bad, x, 0.0, 0.1, dW), DivergenceError);
}

TEST_CASE("zero-horizon path holds only the initial state") {
  ItoSde sde = scalar_sde([](double) { return 0.0; },
                          [](double) { return 1.0; });
  VectorXd x0(1);
  x0 << 2.5;
  const SamplePath path = simulate_path(sde, x0, 0.0, 0.1, 42);
  CHECK(path.states.cols() == 1);
  CHECK(path.states(0, 0) == 2.5);
  CHECK(path.increments.cols() == 0);
}

TEST_CASE("Brownian motion variance matches the Monte Carlo oracle") {
  ItoSde sde = scalar_sde([](double) { return 0.0; },
                          [](double) { return 1.0; });
  VectorXd x0 = VectorXd::Zero(1);
  const double horizon = 1.0;
  const int paths = 2000;
  double sum = 0.0, sum_sq = 0.0;
  for (int seed = 0; seed < paths; ++seed) {
    const SamplePath path = simulate_path(sde, x0, horizon, 0.01, seed);
    const double last = path.states(0, path.states.cols() - 1);
    sum += last;
    sum_sq += last * last;
  }
  const double mean = sum / paths;
  const double variance = sum_sq / paths - mean * mean;
  // sample variance of N(0, T): std error ~ T * sqrt(2 / n)
  const double three_se = 3.0 * horizon * std::sqrt(2.0 / paths);
  CHECK(std::abs(variance - horizon) < three_se);
}

TEST_CASE("stored increments replay the stored states exactly") {
  ItoSde sde = scalar_sde([](double x) { return -0.5 * x; },
                          [](double x) { return 1.0 + 0.1 * x * x; });
  VectorXd x0(1);
  x0 << 0.3;
  const SamplePath path = simulate_path(sde, x0, 0.5, 0.01, 99);

  VectorXd x = x0;
  for (int k = 0; k < path.increments.cols(); ++k) {
    x = euler_maruyama_step(sde, x, path.times[k], 0.01, path.increments.col(k));
    CHECK(x[0] == path.states(0, k + 1));
  }

  // identical seed, identical path
  const SamplePath again = simulate_path(sde, x0, 0.5, 0.01, 99);
  CHECK((again.states - path.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-integral horizon is rejected") {
  ItoSde sde = scalar_sde([](double) { return 0.0; },
                          [](double) { return 1.0; });
  VectorXd x0 = VectorXd::Zero(1);
  CHECK_THROWS_AS(simulate_path(sde, x0, 0.55, 0.1, 1), ConfigError);
}
