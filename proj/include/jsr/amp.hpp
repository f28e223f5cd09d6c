#pragma once

// Approximate message passing for multiple measurement vectors.
//
// Node-indexed iteration (N + M messages of length J):
//
//   mu^n(i+1)    = eta(theta^n(i); Sigma(i))
//   z^m(i+1)     = y^m - sum_q Phi_mq mu^q(i+1)
//                  + [sum_q Phi_mq^2 eta'(theta^q(i); Sigma(i))]^T z^m(i)
//   theta^n(i+1) = sum_l Phi_ln z^l(i+1) + mu^n(i+1)
//   Gamma(i+1)   = (1/N) sum_n V(theta^n(i); Sigma(i))
//   Sigma(i+1)   = sigma^2 I + Gamma(i+1) / delta
//
// The Jacobian eta' uses the (a, b) = d eta_a / d theta_b convention, so the
// transposed product reduces to the scalar Onsager term for J = 1.

#include <Eigen/Dense>

#include "jsr/metrics.hpp"
#include "jsr/model.hpp"
#include "jsr/prior_denoiser.hpp"

namespace jsr {

struct AmpConfig {
  int max_iter = 500;
  double tol = 1e-8;     // relative Frobenius change of mu
  double damping = 0.0;  // mu <- (1 - damping) mu_new + damping mu_old
  /// Isotropic recursion (Lambda = I, Sigma = c I, Gamma = gamma I) that drops
  /// the t(1-t) term of the covariance update.
  bool fast_path = false;
  /// Fast path only: keep the t(1-t) term, gamma = c * mean_n tr(eta'_n) / J,
  /// instead of gamma = c / (1 + c) * mean_n t_n. The dropped form loses
  /// stability at J = 3 once c is small.
  bool fast_path_rank_one = false;
  /// Disabling removes the Onsager correction (plain iterative denoising).
  bool onsager = true;

  void validate() const;
};

struct AmpState {
  Eigen::MatrixXd mu;     // N x J
  Eigen::MatrixXd theta;  // N x J
  Eigen::MatrixXd z;      // M x J
  Eigen::MatrixXd Sigma;  // J x J
  Eigen::MatrixXd Gamma;  // J x J
  Eigen::VectorXd weights;  // t of the last denoising pass (eps before the first)
  int iter = 1;
};

AmpState amp_init(const SensingMatrix& phi, const MeasurementSet& meas, const PriorParams& prior);

/// One general-path sweep. Throws NumericalError on non-finite output.
AmpState amp_iterate(const AmpState& state, const SensingMatrix& phi,
                     const MeasurementSet& meas, const PriorParams& prior,
                     const AmpConfig& cfg = {});

/// One sweep of the isotropic recursion; the prior must have Lambda = I.
AmpState amp_iterate_uncorrelated(const AmpState& state, const SensingMatrix& phi,
                                  const MeasurementSet& meas, double epsilon,
                                  const AmpConfig& cfg = {});

/// Runs amp_init and iterates until the relative change of mu drops below
/// cfg.tol or cfg.max_iter sweeps. `truth`, when given, fills nse/mse in the
/// trace. Non-convergence is reported through SolveResult::converged.
SolveResult amp_solve(const SensingMatrix& phi, const MeasurementSet& meas,
                      const PriorParams& prior, const AmpConfig& cfg = {},
                      const Eigen::MatrixXd* truth = nullptr);

}  // namespace jsr
