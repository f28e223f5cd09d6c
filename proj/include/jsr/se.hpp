#pragma once

// State evolution for the AMP iteration.
//
// Scalar form (Lambda = I, large J): c(i+1) = sigma^2 + (eps / delta) c(i) / (1 + c(i)).
// Matrix form: Gamma(k) = E[V(X + Z; Sigma(k-1))] with X drawn from the row
// prior and Z ~ N(0, Sigma(k-1)), Sigma(k) = sigma^2 I + Gamma(k) / delta.
//
// Indexing: Sigma(i) is the covariance consumed by the i-th denoising pass, so
// c(1) = sigma^2 + eps tr(Lambda) / (J delta) matches amp_init.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "jsr/prior_denoiser.hpp"

namespace jsr {

double se_step_scalar(double c, double epsilon, double delta, double sigma2);

/// c(1) = sigma^2 + eps tr(Lambda) / (J delta).
double se_initial_c(const PriorParams& prior, double delta, double sigma2);

struct FixedPointResult {
  double c_star = 0.0;
  long iterations = 0;
  bool converged = false;
  /// Aitken estimate of |c_star - limit| at termination.
  double error_estimate = 0.0;
};

/// Iterates se_step_scalar from c1 until the estimated distance to the limit,
/// |dc| rho / (1 - rho) with rho the observed contraction ratio, drops below tol.
FixedPointResult se_fixed_point(double epsilon, double delta, double sigma2, double tol,
                                double c1, long max_iter = 1'000'000);

/// [c(1), ..., c(n_iters)] starting from c(1) = sigma^2 + eps / delta.
std::vector<double> se_predict_trace(double epsilon, double delta, double sigma2, int n_iters);
/// Same, from an explicit c(1).
std::vector<double> se_predict_trace_from(double c1, double epsilon, double delta, double sigma2,
                                          int n_iters);

struct SeMatrixState {
  Eigen::MatrixXd Gamma;
  Eigen::MatrixXd Sigma;
  int mc_samples = 100000;
};

/// Gamma = eps Lambda, Sigma = sigma^2 I + Gamma / delta.
SeMatrixState se_matrix_init(const PriorParams& prior, double delta, double sigma2,
                             int mc_samples = 100000);

/// Recommended lower bound on Monte Carlo samples per step.
inline constexpr int kMinMcSamples = 100;

struct SeMatrixStep {
  SeMatrixState state;
  Eigen::MatrixXd gamma_stderr;  // entrywise standard error of Gamma
  bool low_sample_count = false;
};

/// One Monte Carlo step. Sample k of step `step` reads counters k (support)
/// and k J + j (slab, noise) of streams keyed by derive_seed(seed, step).
SeMatrixStep se_step_matrix(const SeMatrixState& state, const PriorParams& prior, double delta,
                            double sigma2, std::uint64_t seed, std::uint64_t step = 0);

/// Sigma(1), ..., Sigma(n_iters) as consumed by the denoiser.
std::vector<SeMatrixState> se_matrix_trace(const PriorParams& prior, double delta, double sigma2,
                                           int n_iters, std::uint64_t seed,
                                           int mc_samples = 100000);

struct WeightCheck {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo mean of the scalar-shrinkage weight t(theta) with theta drawn
/// from eps N(0, (1+c) I_J) + (1 - eps) N(0, c I_J). The exact mean is eps.
WeightCheck mean_weight_check(double epsilon, double c, int snapshots, int n_samples,
                              std::uint64_t seed);

}  // namespace jsr
