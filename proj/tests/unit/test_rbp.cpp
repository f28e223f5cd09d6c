#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "jsr/metrics.hpp"
#include "jsr/model.hpp"
#include "jsr/prior_denoiser.hpp"
#include "jsr/rbp.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using jsr::PriorParams;
using jsr::RbpConfig;
using jsr::RbpVariant;

namespace {

jsr::ModelConfig fig2_like(std::uint64_t seed) {
  jsr::ModelConfig cfg;
  cfg.seed = seed;
  return cfg;
}

RbpConfig variant(RbpVariant v) {
  RbpConfig cfg;
  cfg.variant = v;
  return cfg;
}

// Column permutation of Phi and the matching row permutation of X.
jsr::Instance permute_columns(const jsr::Instance& inst, const std::vector<int>& perm) {
  std::vector<jsr::MatrixEntry> entries;
  for (const auto& e : inst.phi.edges()) entries.push_back({e.row, perm[static_cast<std::size_t>(e.col)], e.value});
  jsr::Instance out;
  out.phi = jsr::SensingMatrix(inst.phi.rows(), inst.phi.cols(), std::move(entries));
  out.signal.X.resize(inst.signal.X.rows(), inst.signal.X.cols());
  out.signal.support.resize(inst.signal.support.size());
  for (std::size_t n = 0; n < perm.size(); ++n) {
    out.signal.X.row(perm[n]) = inst.signal.X.row(static_cast<int>(n));
    out.signal.support[perm[n]] = inst.signal.support[static_cast<int>(n)];
  }
  out.meas = inst.meas;
  return out;
}

}  // namespace

TEST_CASE("initial messages") {
  const auto inst = jsr::generate_instance(fig2_like(1));
  const PriorParams prior = PriorParams::isotropic(0.1, 3);
  const auto s = jsr::rbp_init(inst.phi, inst.meas, prior);
  CHECK(s.mu.norm() == 0.0);
  for (const auto& g : s.gamma) CHECK((g - 0.1 * MatrixXd::Identity(3, 3)).norm() == 0.0);
  for (int e = 0; e < inst.phi.nnz(); ++e) {
    CHECK((s.z.col(e) - inst.meas.Y.row(inst.phi.edge(e).row).transpose()).norm() == 0.0);
  }
  const MatrixXd expect = (inst.meas.sigma2 + 0.1 / 0.5) * MatrixXd::Identity(3, 3);
  CHECK((s.shared_sigma - expect).norm() < 1e-15);
}

TEST_CASE("single edge") {
  const jsr::SensingMatrix phi(1, 1, {{0, 0, 1.0}});
  jsr::MeasurementSet meas;
  meas.Y = MatrixXd::Constant(1, 1, 0.8);
  meas.sigma2 = 0.3;
  const PriorParams prior = PriorParams::isotropic(0.2, 1);
  const auto s0 = jsr::rbp_init(phi, meas, prior);
  const auto s1 = jsr::rbp_iterate_edge_dependent(s0, phi, meas, prior);
  CHECK(s1.mu(0, 0) == 0.0);
  CHECK(s1.gamma[0](0, 0) == doctest::Approx(0.2));
  const auto b = jsr::rbp_belief(s1, phi, prior, RbpConfig{});
  const VectorXd expect = jsr::posterior_mean(VectorXd::Constant(1, 0.8), prior,
                                              jsr::GaussianChannel::isotropic(0.3, 1));
  CHECK(b.estimate(0, 0) == doctest::Approx(expect[0]).epsilon(1e-12));
}

TEST_CASE("zero signal stays at zero") {
  jsr::ModelConfig cfg = fig2_like(2);
  cfg.noise = jsr::NoiseVariance{0.0};
  auto inst = jsr::generate_instance(cfg);
  inst.meas.Y.setZero();
  const PriorParams prior = PriorParams::isotropic(0.1, 3);
  for (auto v : {RbpVariant::kEdgeDependent, RbpVariant::kEdgeIndependent}) {
    RbpConfig rc = variant(v);
    rc.max_iter = 20;
    const auto r = jsr::rbp_solve(inst.phi, inst.meas, prior, rc);
    CHECK(r.estimate.norm() == 0.0);
  }
  auto s = jsr::rbp_init(inst.phi, inst.meas, prior);
  double prev = 1e300;
  for (int it = 0; it < 5; ++it) {
    s = jsr::rbp_iterate_edge_dependent(s, inst.phi, inst.meas, prior);
    CHECK(s.mu.norm() == 0.0);
    CHECK(s.z.norm() == 0.0);
    double tr = 0.0;
    for (const auto& g : s.gamma) tr += g.trace();
    CHECK(tr <= prev * (1.0 + 1e-12));
    prev = tr;
  }
}

TEST_CASE("linear MMSE with a Gaussian prior") {
  const auto phi = jsr::gen_regular_sensing_matrix(20, 40, 19, 5);
  std::mt19937_64 rng(5);
  MatrixXd lambda = oracle::random_spd(2, 0.5, 1.5, rng);
  const PriorParams prior(1.0, lambda);
  jsr::SignalEnsemble sig;
  sig.X = MatrixXd::Zero(40, 2);
  for (int n = 0; n < 40; ++n) sig.X.row(n) = oracle::random_vector(2, 1.0, rng).transpose();
  sig.support = Eigen::VectorXi::Ones(40);
  const auto meas = jsr::measure(phi, sig, 1.0, 77);
  const MatrixXd ref = oracle::linear_mmse(phi.to_dense(), meas.Y, lambda, 1.0);

  RbpConfig ed = variant(RbpVariant::kEdgeDependent);
  ed.tol = 1e-13;
  ed.max_iter = 2000;
  const auto rd = jsr::rbp_solve(phi, meas, prior, ed);
  CHECK(rd.converged);
  CHECK(oracle::relative_sq_error(rd.estimate, ref) < 1e-12);

  RbpConfig ei = variant(RbpVariant::kEdgeIndependent);
  ei.tol = 1e-13;
  ei.max_iter = 2000;
  const auto ri = jsr::rbp_solve(phi, meas, prior, ei);
  CHECK(oracle::relative_sq_error(ri.estimate, ref) < 1e-3);
}

TEST_CASE("equivariance") {
  const auto inst = jsr::generate_instance(fig2_like(3));
  const PriorParams prior = PriorParams::isotropic(0.1, 3);
  std::vector<int> perm(100);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  const auto pinst = permute_columns(inst, perm);
  for (auto v : {RbpVariant::kEdgeDependent, RbpVariant::kEdgeIndependent}) {
    RbpConfig rc = variant(v);
    rc.max_iter = 30;
    const auto a = jsr::rbp_solve(inst.phi, inst.meas, prior, rc);
    const auto b = jsr::rbp_solve(pinst.phi, pinst.meas, prior, rc);
    for (int n = 0; n < 100; ++n) {
      CHECK((a.estimate.row(n) - b.estimate.row(perm[static_cast<std::size_t>(n)])).norm() <=
            1e-9 * a.estimate.norm());
    }

    jsr::MeasurementSet swapped = inst.meas;
    swapped.Y.col(0).swap(swapped.Y.col(2));
    const auto c = jsr::rbp_solve(inst.phi, swapped, prior, rc);
    MatrixXd back = c.estimate;
    back.col(0).swap(back.col(2));
    CHECK((back - a.estimate).norm() <= 1e-12 * a.estimate.norm());
  }
}

TEST_CASE("solve is deterministic and traces are complete") {
  const auto inst = jsr::generate_instance(fig2_like(4));
  const PriorParams prior = PriorParams::isotropic(0.1, 3);
  RbpConfig rc = variant(RbpVariant::kEdgeDependent);
  rc.max_iter = 15;
  const auto a = jsr::rbp_solve(inst.phi, inst.meas, prior, rc, &inst.signal.X);
  const auto b = jsr::rbp_solve(inst.phi, inst.meas, prior, rc, &inst.signal.X);
  CHECK((a.estimate - b.estimate).norm() == 0.0);
  REQUIRE(a.trace.size() == static_cast<std::size_t>(a.iterations));
  CHECK(a.trace.size() <= 15u);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].iteration == static_cast<int>(i) + 1);
    CHECK(a.trace[i].nse_db == b.trace[i].nse_db);
    CHECK(a.trace[i].sigma_trace > 0.0);
  }
  const auto untracked = jsr::rbp_solve(inst.phi, inst.meas, prior, rc);
  CHECK(std::isnan(untracked.trace.front().nse_db));
}

TEST_CASE("edge-independent variants") {
  const auto inst = jsr::generate_instance(fig2_like(5));
  const PriorParams prior = PriorParams::isotropic(0.1, 3);
  RbpConfig ed = variant(RbpVariant::kEdgeDependent);
  RbpConfig ei = variant(RbpVariant::kEdgeIndependent);
  const double nd = jsr::nse_db(jsr::rbp_solve(inst.phi, inst.meas, prior, ed).estimate, inst.signal.X).db;
  const double ni = jsr::nse_db(jsr::rbp_solve(inst.phi, inst.meas, prior, ei).estimate, inst.signal.X).db;
  CHECK(nd < -25.0);
  CHECK(std::abs(nd - ni) < 1.5);

  ei.exact_cavity_scale = false;
  ei.max_iter = 50;
  const auto unit = jsr::rbp_solve(inst.phi, inst.meas, prior, ei, &inst.signal.X);
  CHECK(unit.iterations == 50);
  CHECK(std::isfinite(unit.trace.back().nse_db));
}

TEST_CASE("config validation") {
  RbpConfig rc;
  rc.damping = 1.0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  rc.damping = 0.0;
  rc.max_iter = 0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  const auto inst = jsr::generate_instance(fig2_like(6));
  CHECK_THROWS_AS(jsr::rbp_solve(inst.phi, inst.meas, PriorParams::isotropic(0.1, 2)),
                  std::invalid_argument);
}
