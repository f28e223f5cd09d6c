#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "jsr/metrics.hpp"
#include "jsr/model.hpp"
#include "jsr/random.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using jsr::ModelConfig;
using jsr::PriorParams;

namespace {

ModelConfig config(int N, int M, int J, int d, double eps, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.N = N;
  cfg.M = M;
  cfg.J = J;
  cfg.d = d;
  cfg.prior = PriorParams::isotropic(eps, J);
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("random streams") {
  const jsr::RandomStream a(7, jsr::StreamId::kSlab), b(7, jsr::StreamId::kSlab);
  const jsr::RandomStream c(7, jsr::StreamId::kNoise), d(8, jsr::StreamId::kSlab);
  CHECK(a.bits_at(123) == b.bits_at(123));
  CHECK(a.bits_at(123) != c.bits_at(123));
  CHECK(a.bits_at(123) != d.bits_at(123));
  CHECK(jsr::derive_seed(1, 2) != jsr::derive_seed(2, 1));

  jsr::RandomStream s(3, jsr::StreamId::kMonteCarlo);
  double sum = 0.0, sum2 = 0.0, usum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double z = s.normal_at(static_cast<std::uint64_t>(k));
    sum += z;
    sum2 += z * z;
    const double u = s.uniform_at(static_cast<std::uint64_t>(k));
    CHECK_MESSAGE((u >= 0.0 && u < 1.0), "uniform out of range");
    usum += u;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(usum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  s.seek(10);
  CHECK(s.uniform() == s.uniform_at(10));
}

TEST_CASE("signal statistics") {
  {
    const auto sig = jsr::gen_signal(config(1000, 10, 2, 5, 0.0, 1));
    CHECK(sig.X.norm() == 0.0);
    CHECK(sig.support.sum() == 0);
  }
  {
    const auto sig = jsr::gen_signal(config(100000, 10, 1, 5, 1.0, 2));
    const double mean = sig.X.mean();
    const double var = (sig.X.array() - mean).square().mean();
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);
  }
  {
    const auto sig = jsr::gen_signal(config(100000, 10, 1, 5, 0.1, 3));
    const double frac = sig.support.cast<double>().mean();
    CHECK(frac >= 0.097);
    CHECK(frac <= 0.103);
    for (int n = 0; n < 1000; ++n) CHECK((sig.support[n] == 0) == (sig.X.row(n).norm() == 0.0));
  }
  {
    ModelConfig cfg = config(50000, 10, 2, 5, 1.0, 4);
    MatrixXd lambda(2, 2);
    lambda << 2.0, 0.6, 0.6, 0.5;
    cfg.prior = PriorParams(1.0, lambda);
    const auto sig = jsr::gen_signal(cfg);
    const MatrixXd cov = sig.X.transpose() * sig.X / cfg.N;
    CHECK((cov - lambda).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("sensing matrix statistics") {
  const ModelConfig cfg = config(100, 50, 3, 20, 0.1, 0);
  double col_mean = 0.0, row_mean = 0.0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    ModelConfig c = cfg;
    c.seed = jsr::derive_seed(99, static_cast<std::uint64_t>(r));
    const auto phi = jsr::gen_sensing_matrix(c);
    col_mean += phi.col_square_sums().mean() / reps;
    row_mean += phi.row_square_sums().mean() / reps;
    for (const auto& e : phi.edges()) CHECK(std::abs(std::abs(e.value) - 1.0 / std::sqrt(20.0)) < 1e-15);
  }
  CHECK(col_mean >= 0.95);
  CHECK(col_mean <= 1.05);
  CHECK(row_mean >= 1.9);
  CHECK(row_mean <= 2.1);

  const auto tiny = jsr::gen_sensing_matrix(config(2000, 2, 1, 1, 0.1, 5));
  for (const auto& e : tiny.edges()) CHECK(std::abs(e.value) == 1.0);
  CHECK(std::abs(tiny.nnz() / 4000.0 - 0.5) < 0.05);
}

TEST_CASE("regular sensing matrix") {
  const auto phi = jsr::gen_regular_sensing_matrix(20, 40, 10, 3);
  const VectorXd cs = phi.col_square_sums();
  const VectorXd rs = phi.row_square_sums();
  CHECK((cs.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((rs.array() - 2.0).abs().maxCoeff() < 1e-12);
  for (int n = 0; n < 40; ++n) {
    std::set<int> rows;
    for (int e : phi.col_edges(n)) rows.insert(phi.edge(e).row);
    CHECK(rows.size() == 10u);
  }
  CHECK_THROWS_AS(jsr::gen_regular_sensing_matrix(20, 41, 10, 3), std::invalid_argument);
}

TEST_CASE("sparse products match the dense matrix") {
  const auto phi = jsr::gen_sensing_matrix(config(60, 30, 2, 8, 0.1, 6));
  const MatrixXd dense = phi.to_dense();
  const MatrixXd x = MatrixXd::Random(60, 2);
  const MatrixXd z = MatrixXd::Random(30, 2);
  CHECK((phi.multiply(x) - dense * x).norm() < 1e-12);
  CHECK((phi.multiply_transpose(z) - dense.transpose() * z).norm() < 1e-12);
  const auto back = jsr::SensingMatrix::from_dense(dense);
  CHECK(back.nnz() == phi.nnz());
  CHECK((back.to_dense() - dense).norm() == 0.0);
  int total = 0;
  for (int n = 0; n < 60; ++n) {
    for (int e : phi.col_edges(n)) CHECK(phi.edge(e).col == n);
    total += phi.col_degree(n);
  }
  CHECK(total == phi.nnz());
  CHECK_THROWS_AS(jsr::SensingMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(jsr::SensingMatrix(2, 2, {{0, 3, 1.0}}), std::invalid_argument);
}

TEST_CASE("measurements") {
  const auto phi = jsr::SensingMatrix(1, 1, {{0, 0, 1.0}});
  jsr::SignalEnsemble sig;
  sig.X = MatrixXd(1, 3);
  sig.X << 1.0, 2.0, 3.0;
  sig.support = Eigen::VectorXi::Ones(1);
  CHECK((jsr::measure(phi, sig, 0.0, 1).Y - sig.X).norm() == 0.0);

  const auto wide = jsr::gen_sensing_matrix(config(10, 20000, 5, 10, 0.1, 7));
  jsr::SignalEnsemble zero;
  zero.X = MatrixXd::Zero(10, 5);
  zero.support = Eigen::VectorXi::Zero(10);
  CHECK(jsr::measure(wide, zero, 0.0, 1).Y.norm() == 0.0);
  const MatrixXd y = jsr::measure(wide, zero, 4.0, 1).Y;
  const double var = y.array().square().mean();
  CHECK(var >= 3.9);
  CHECK(var <= 4.1);
  CHECK_THROWS_AS(jsr::measure(wide, zero, -1.0, 1), std::invalid_argument);
}

TEST_CASE("snr convention") {
  CHECK(jsr::sigma2_from_snr(0.0, PriorParams::isotropic(1.0, 2), 1.0) == doctest::Approx(1.0));
  CHECK(jsr::sigma2_from_snr(30.0, PriorParams::isotropic(0.1, 3), 0.5) ==
        doctest::Approx(2e-4).epsilon(1e-12));
  double prev = 1e300;
  for (double db = 0.0; db <= 200.0; db += 10.0) {
    const double s2 = jsr::sigma2_from_snr(db, PriorParams::isotropic(0.1, 3), 0.5);
    CHECK(s2 < prev);
    prev = s2;
  }
}

TEST_CASE("generation is deterministic") {
  const ModelConfig cfg = config(100, 50, 3, 20, 0.1, 42);
  const auto a = jsr::generate_instance(cfg);
  const auto b = jsr::generate_instance(cfg);
  CHECK((a.phi.to_dense() - b.phi.to_dense()).norm() == 0.0);
  CHECK((a.signal.X - b.signal.X).norm() == 0.0);
  CHECK((a.meas.Y - b.meas.Y).norm() == 0.0);
  ModelConfig other = cfg;
  other.seed = 43;
  CHECK((jsr::generate_instance(other).meas.Y - a.meas.Y).norm() > 0.0);
}

TEST_CASE("nse and support metrics") {
  const MatrixXd x = MatrixXd::Random(20, 3);
  CHECK(jsr::nse_db(x, x).db == jsr::kNseFloorDb);
  CHECK(jsr::nse_db(MatrixXd::Zero(20, 3), x).db == doctest::Approx(0.0));
  MatrixXd e = MatrixXd::Random(20, 3);
  e *= 0.1 * x.norm() / e.norm();
  CHECK(jsr::nse_db(x + e, x).db == doctest::Approx(-20.0).epsilon(1e-10));
  CHECK(jsr::nse_db(x, MatrixXd::Zero(20, 3)).zero_truth);

  Eigen::VectorXi truth(4);
  truth << 1, 0, 1, 0;
  const auto exact = jsr::support_metrics(truth.cast<double>(), truth);
  CHECK(exact.precision == 1.0);
  CHECK(exact.recall == 1.0);
  const auto none = jsr::support_metrics(VectorXd::Zero(4), truth);
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  VectorXd half(4);
  half << 0.9, 0.1, 0.2, 0.0;
  const auto h = jsr::support_metrics(half, truth);
  CHECK(h.precision == 1.0);
  CHECK(h.recall == 0.5);
}
