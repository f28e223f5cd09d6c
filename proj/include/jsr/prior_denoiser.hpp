#pragma once

// MMSE denoising of one signal row under the spike-and-slab prior
//
//     x ~ (1 - eps) * delta_0 + eps * N_J(0, Lambda)
//
// observed through the Gaussian channel theta = x + N_J(0, Sigma).
//
// The posterior is a two-component mixture: a point mass at zero and a
// Gaussian with covariance Xi = (Lambda^-1 + Sigma^-1)^-1 and mean
// w = Xi Sigma^-1 theta. The slab weight t(theta; Sigma) is evaluated through
// its log-odds so that large |theta| or large J never overflow.

#include <Eigen/Dense>

#include "jsr/linalg.hpp"

namespace jsr {

/// Spike-and-slab row prior: support probability eps and slab covariance Lambda.
/// eps = 0 and eps = 1 are accepted and handled by dedicated closed forms.
class PriorParams {
 public:
  PriorParams(double epsilon, Eigen::MatrixXd lambda);

  /// eps with Lambda = variance * I_J.
  static PriorParams isotropic(double epsilon, int snapshots, double variance = 1.0);

  double epsilon() const { return epsilon_; }
  int snapshots() const { return static_cast<int>(lambda_.rows()); }
  const Eigen::MatrixXd& lambda() const { return lambda_; }
  const Eigen::MatrixXd& lambda_inverse() const { return lambda_inv_; }
  /// Lower Cholesky factor L with L L^T = Lambda, used for sampling.
  const Eigen::MatrixXd& lambda_factor() const { return lambda_chol_; }
  /// Second moment of one row, eps * Lambda (the row mean is zero).
  Eigen::MatrixXd row_covariance() const { return epsilon_ * lambda_; }
  /// True when Lambda is exactly the identity.
  bool unit_isotropic() const;

 private:
  double epsilon_;
  Eigen::MatrixXd lambda_;
  Eigen::MatrixXd lambda_inv_;
  Eigen::MatrixXd lambda_chol_;
};

/// Effective noise covariance of the pseudo-observation theta.
/// Eigenvalues are clamped at kEigenFloor; indefinite inputs raise.
class GaussianChannel {
 public:
  explicit GaussianChannel(const Eigen::MatrixXd& sigma);
  static GaussianChannel isotropic(double c, int snapshots);

  const Eigen::MatrixXd& sigma() const { return sigma_.matrix; }
  const Eigen::MatrixXd& sigma_inverse() const { return sigma_.inverse; }
  double logdet() const { return sigma_.logdet; }
  int snapshots() const { return static_cast<int>(sigma_.matrix.rows()); }

 private:
  FlooredSpd sigma_;
};

struct DenoiseResult {
  Eigen::VectorXd mean;  // eta(theta; Sigma)
  Eigen::MatrixXd cov;   // V(theta; Sigma)
  double weight = 0.0;   // t(theta; Sigma)
};

/// Denoiser bound to one (prior, channel) pair. Every Sigma-dependent quantity
/// is factored once at construction; per-row calls cost O(J^2).
class SpikeSlabDenoiser {
 public:
  SpikeSlabDenoiser(const PriorParams& prior, const GaussianChannel& chan);

  int snapshots() const { return static_cast<int>(xi_.rows()); }

  /// log((1 - t) / t), finite for every finite theta when 0 < eps < 1.
  double log_odds(const Eigen::VectorXd& theta) const;
  double weight(const Eigen::VectorXd& theta) const;
  DenoiseResult denoise(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd mean(const Eigen::VectorXd& theta) const;

  /// d t / d theta.
  Eigen::VectorXd weight_gradient(const Eigen::VectorXd& theta) const;
  /// d eta_a / d theta_b stored at (a, b).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const;

  /// Slab posterior covariance Xi = (Lambda^-1 + Sigma^-1)^-1.
  const Eigen::MatrixXd& slab_covariance() const { return xi_; }
  /// Linear map theta -> w, equal to Xi Sigma^-1 = Lambda (Lambda + Sigma)^-1.
  const Eigen::MatrixXd& slab_gain() const { return gain_; }

 private:
  enum class Regime { kSpikeOnly, kSlabOnly, kMixture };

  struct Weights {
    double t;
    double one_minus_t;
  };
  Weights weights(const Eigen::VectorXd& theta) const;

  Regime regime_;
  Eigen::MatrixXd xi_;
  Eigen::MatrixXd gain_;
  Eigen::MatrixXd quad_;    // Sigma^-1 - (Sigma + Lambda)^-1
  double log_odds0_ = 0.0;  // log((1-eps)/eps) + 1/2 log(|Lambda + Sigma| / |Sigma|)
};

double posterior_weight(const Eigen::VectorXd& theta, const PriorParams& prior,
                        const GaussianChannel& chan);
Eigen::VectorXd posterior_mean(const Eigen::VectorXd& theta, const PriorParams& prior,
                               const GaussianChannel& chan);
Eigen::MatrixXd posterior_cov(const Eigen::VectorXd& theta, const PriorParams& prior,
                              const GaussianChannel& chan);
Eigen::VectorXd weight_gradient(const Eigen::VectorXd& theta, const PriorParams& prior,
                                const GaussianChannel& chan);
Eigen::MatrixXd posterior_jacobian(const Eigen::VectorXd& theta, const PriorParams& prior,
                                   const GaussianChannel& chan);

/// Closed form for Lambda = I and Sigma = c I:
///   t = 1 / (1 + (1-eps)/eps (1 + 1/c)^{J/2} exp(-|theta|^2 / (2c(1+c)))),
///   mean = t theta / (1 + c).
struct ShrinkageResult {
  double weight = 0.0;
  Eigen::VectorXd mean;
};
ShrinkageResult scalar_shrinkage(const Eigen::VectorXd& theta, double c, double epsilon);

/// log((1 - t) / t) of scalar_shrinkage for a row with squared norm `norm2`.
double scalar_log_odds(double norm2, int snapshots, double c, double epsilon);

/// Large-J threshold on |theta|^2 / J: tau(c) = c (1 + c) log(1 + 1/c).
double hard_threshold_limit(double c);

/// Numerically stable 1 / (1 + exp(log_odds)).
double logistic_weight(double log_odds);

}  // namespace jsr
