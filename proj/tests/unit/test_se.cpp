#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "jsr/amp.hpp"
#include "jsr/model.hpp"
#include "jsr/random.hpp"
#include "jsr/se.hpp"

using Eigen::MatrixXd;
using jsr::PriorParams;

TEST_CASE("scalar step") {
  CHECK(jsr::se_step_scalar(1.0, 0.1, 0.5, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(jsr::se_step_scalar(0.0, 0.1, 0.5, 3e-3) == 3e-3);
  CHECK(jsr::se_step_scalar(0.1, 0.1, 0.5, 0.0) == doctest::Approx(0.2 * 0.1 / 1.1).epsilon(1e-15));
}

TEST_CASE("scalar trace") {
  const auto tr = jsr::se_predict_trace(0.1, 0.5, 0.0, 6);
  REQUIRE(tr.size() == 6u);
  CHECK(tr[0] == doctest::Approx(0.2));
  CHECK(tr[1] == doctest::Approx(0.033333).epsilon(1e-5));
  CHECK(tr[2] == doctest::Approx(0.006452).epsilon(1e-4));
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] < tr[i - 1]);

  const auto flat = jsr::se_predict_trace(0.0, 0.5, 0.01, 5);
  for (std::size_t i = 1; i < flat.size(); ++i) CHECK(flat[i] == 0.01);

  const auto noisy = jsr::se_predict_trace_from(5.0, 0.2, 0.5, 1.5, 40);
  for (std::size_t i = 1; i < noisy.size(); ++i) CHECK(noisy[i] <= noisy[i - 1]);
  CHECK(noisy.back() > 1.5);

  const PriorParams prior = PriorParams::isotropic(0.1, 3);
  CHECK(jsr::se_initial_c(prior, 0.5, 2e-4) == doctest::Approx(0.2002).epsilon(1e-14));
}

TEST_CASE("fixed points") {
  const auto zero = jsr::se_fixed_point(0.1, 0.5, 0.0, 1e-12, 100.0);
  CHECK(zero.converged);
  CHECK(zero.c_star < 1e-8);

  for (double c1 : {0.01, 1.0, 100.0}) {
    const auto fp = jsr::se_fixed_point(0.3, 0.2, 0.0, 1e-10, c1);
    CHECK(fp.converged);
    CHECK(fp.c_star == doctest::Approx(0.5).epsilon(1e-8));
  }

  const auto edge = jsr::se_fixed_point(0.3, 0.3, 0.0, 1e-6, 1.0, 1'000'000);
  CHECK(edge.c_star < 1e-5);

  const auto noisy = jsr::se_fixed_point(0.1, 0.5, 0.01, 1e-12, 1.0);
  CHECK(noisy.converged);
  CHECK(std::abs(jsr::se_step_scalar(noisy.c_star, 0.1, 0.5, 0.01) - noisy.c_star) < 1e-12);
}

TEST_CASE("noiseless map contracts iff eps <= delta") {
  for (double eps : {0.1, 0.3, 0.5}) {
    for (double delta : {0.2, 0.3, 0.6}) {
      bool below = true;
      for (int k = 1; k <= 1000; ++k) {
        const double c = 1e-3 * k * k;
        below = below && jsr::se_step_scalar(c, eps, delta, 0.0) <= c;
      }
      CHECK(below == (eps <= delta));
    }
  }
}

TEST_CASE("matrix recursion") {
  MatrixXd lambda(2, 2);
  lambda << 1.5, 0.4, 0.4, 0.8;
  const PriorParams gauss(1.0, lambda);
  const auto s0 = jsr::se_matrix_init(gauss, 0.5, 0.1, 2000);
  const auto s1 = jsr::se_step_matrix(s0, gauss, 0.5, 0.1, 1);
  const MatrixXd xi = (lambda.inverse() + s0.Sigma.inverse()).inverse();
  CHECK((s1.state.Gamma - xi).norm() < 1e-12);
  MatrixXd expect = xi / 0.5;
  expect.diagonal().array() += 0.1;
  CHECK((s1.state.Sigma - expect).norm() < 1e-12);

  const PriorParams sparse = PriorParams::isotropic(0.1, 3);
  const auto t0 = jsr::se_matrix_init(sparse, 0.5, 2e-4, 100000);
  const auto t1 = jsr::se_step_matrix(t0, sparse, 0.5, 2e-4, 2);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a != b) CHECK(std::abs(t1.state.Gamma(a, b)) <= 3.0 * t1.gamma_stderr(a, b));
    }
  }
  CHECK_FALSE(t1.low_sample_count);

  jsr::MeasurementSet meas;
  meas.Y = MatrixXd::Zero(50, 3);
  meas.sigma2 = 2e-4;
  const jsr::SensingMatrix phi = jsr::SensingMatrix::from_dense(MatrixXd::Identity(50, 100));
  CHECK((jsr::amp_init(phi, meas, sparse).Sigma - t0.Sigma).norm() < 1e-15);

  const auto low = jsr::se_step_matrix(jsr::se_matrix_init(sparse, 0.5, 2e-4, 10), sparse, 0.5, 2e-4, 3);
  CHECK(low.low_sample_count);

  const auto a = jsr::se_matrix_trace(sparse, 0.5, 2e-4, 4, 9, 5000);
  const auto b = jsr::se_matrix_trace(sparse, 0.5, 2e-4, 4, 9, 5000);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i].Gamma - b[i].Gamma).norm() == 0.0);
}

TEST_CASE("matrix recursion tracks the general AMP path") {
  jsr::ModelConfig cfg;
  cfg.N = 2000;
  cfg.M = 1000;
  cfg.d = 400;
  cfg.noise = jsr::NoiseVariance{2e-4};
  const PriorParams& prior = cfg.prior;
  const int iters = 10;
  const auto se = jsr::se_matrix_trace(prior, 0.5, 2e-4, iters, 17, 100000);

  std::vector<double> mse(static_cast<std::size_t>(iters), 0.0);
  const int trials = 10;
  for (int k = 0; k < trials; ++k) {
    cfg.seed = jsr::derive_seed(21, static_cast<std::uint64_t>(k));
    const auto inst = jsr::generate_instance(cfg);
    jsr::AmpConfig ac;
    ac.max_iter = iters - 1;
    ac.tol = 1e-300;
    const auto r = jsr::amp_solve(inst.phi, inst.meas, prior, ac, &inst.signal.X);
    mse[0] += inst.signal.X.squaredNorm() / (2000.0 * 3.0) / trials;
    for (int i = 1; i < iters; ++i) mse[static_cast<std::size_t>(i)] += r.trace[static_cast<std::size_t>(i - 1)].mse / trials;
  }
  for (int i = 0; i < iters; ++i) {
    const double pred = se[static_cast<std::size_t>(i)].Gamma.trace() / 3.0;
    const double gap = std::abs(mse[static_cast<std::size_t>(i)] - pred) / pred;
    MESSAGE("iteration " << i + 1 << " predicted " << pred << " empirical " << mse[static_cast<std::size_t>(i)]);
    CHECK(gap <= 0.2);
  }
}

TEST_CASE("mean support weight") {
  const auto a = jsr::mean_weight_check(0.1, 0.1, 3, 100000, 4);
  CHECK(std::abs(a.estimate - 0.1) <= 3.0 * a.std_error);
  const auto b = jsr::mean_weight_check(0.5, 1.0, 1, 100000, 5);
  CHECK(std::abs(b.estimate - 0.5) <= 3.0 * b.std_error);
  const auto c = jsr::mean_weight_check(1.0, 0.3, 2, 1000, 6);
  CHECK(c.estimate == 1.0);
  CHECK_THROWS_AS(jsr::mean_weight_check(0.1, 0.0, 1, 100, 1), std::domain_error);
}
