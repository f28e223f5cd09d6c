#include "jsr/prior_denoiser.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace jsr {

namespace {

void check_theta(const Eigen::VectorXd& theta, int snapshots) {
  if (theta.size() != snapshots) {
    throw std::invalid_argument("denoiser: theta has " + std::to_string(theta.size()) +
                                " entries, expected " + std::to_string(snapshots));
  }
}

}  // namespace

// --- PriorParams -------------------------------------------------------------

PriorParams::PriorParams(double epsilon, Eigen::MatrixXd lambda)
    : epsilon_(epsilon), lambda_(std::move(lambda)) {
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) {
    throw std::domain_error("PriorParams: epsilon must lie in [0, 1]");
  }
  if (lambda_.rows() == 0 || lambda_.rows() != lambda_.cols()) {
    throw std::invalid_argument("PriorParams: lambda must be square and non-empty");
  }
  if (!lambda_.allFinite() || !is_symmetric(lambda_)) {
    throw std::domain_error("PriorParams: lambda must be finite and symmetric");
  }
  lambda_ = symmetrize(lambda_);
  Eigen::LLT<Eigen::MatrixXd> llt(lambda_);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("PriorParams: lambda is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lambda_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::domain_error("PriorParams: lambda is not positive definite");
  }
  lambda_chol_ = llt.matrixL();
  lambda_inv_ = symmetrize(llt.solve(Eigen::MatrixXd::Identity(lambda_.rows(), lambda_.cols())));
}

PriorParams PriorParams::isotropic(double epsilon, int snapshots, double variance) {
  if (snapshots < 1) throw std::invalid_argument("PriorParams: J must be positive");
  return PriorParams(epsilon, variance * Eigen::MatrixXd::Identity(snapshots, snapshots));
}

bool PriorParams::unit_isotropic() const {
  return lambda_.isIdentity(0.0);
}

// --- GaussianChannel ---------------------------------------------------------

GaussianChannel::GaussianChannel(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("GaussianChannel: sigma must be square and non-empty");
  }
  if (!sigma.allFinite() || !is_symmetric(sigma)) {
    throw std::domain_error("GaussianChannel: sigma must be finite and symmetric");
  }
  sigma_ = floor_spd(sigma);
}

GaussianChannel GaussianChannel::isotropic(double c, int snapshots) {
  return GaussianChannel(c * Eigen::MatrixXd::Identity(snapshots, snapshots));
}

// --- SpikeSlabDenoiser -------------------------------------------------------

double logistic_weight(double log_odds) {
  if (log_odds >= 0.0) {
    const double e = std::exp(-log_odds);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(log_odds));
}

SpikeSlabDenoiser::SpikeSlabDenoiser(const PriorParams& prior, const GaussianChannel& chan) {
  const int J = prior.snapshots();
  if (chan.snapshots() != J) {
    throw std::invalid_argument("SpikeSlabDenoiser: prior and channel dimensions differ");
  }
  const Eigen::MatrixXd& lambda = prior.lambda();
  const Eigen::MatrixXd& sigma = chan.sigma();

  Eigen::LLT<Eigen::MatrixXd> total(sigma + lambda);
  const double logdet_total = spd_logdet(total);
  const Eigen::MatrixXd total_inv =
      symmetrize(total.solve(Eigen::MatrixXd::Identity(J, J)));

  gain_ = lambda * total_inv;
  xi_ = symmetrize(gain_ * sigma);
  quad_ = symmetrize(chan.sigma_inverse() - total_inv);

  const double eps = prior.epsilon();
  if (eps <= 0.0) {
    regime_ = Regime::kSpikeOnly;
  } else if (eps >= 1.0) {
    regime_ = Regime::kSlabOnly;
  } else {
    regime_ = Regime::kMixture;
    log_odds0_ = std::log((1.0 - eps) / eps) + 0.5 * (logdet_total - chan.logdet());
  }
}

double SpikeSlabDenoiser::log_odds(const Eigen::VectorXd& theta) const {
  check_theta(theta, snapshots());
  switch (regime_) {
    case Regime::kSpikeOnly:
      return std::numeric_limits<double>::infinity();
    case Regime::kSlabOnly:
      return -std::numeric_limits<double>::infinity();
    case Regime::kMixture:
      break;
  }
  return log_odds0_ - 0.5 * theta.dot(quad_ * theta);
}

SpikeSlabDenoiser::Weights SpikeSlabDenoiser::weights(const Eigen::VectorXd& theta) const {
  const double lo = log_odds(theta);
  return {logistic_weight(lo), logistic_weight(-lo)};
}

double SpikeSlabDenoiser::weight(const Eigen::VectorXd& theta) const {
  return weights(theta).t;
}

Eigen::VectorXd SpikeSlabDenoiser::mean(const Eigen::VectorXd& theta) const {
  const double t = weight(theta);
  return t * (gain_ * theta);
}

DenoiseResult SpikeSlabDenoiser::denoise(const Eigen::VectorXd& theta) const {
  const auto [t, one_minus_t] = weights(theta);
  const Eigen::VectorXd w = gain_ * theta;
  DenoiseResult out;
  out.weight = t;
  out.mean = t * w;
  out.cov = symmetrize((t * one_minus_t) * (w * w.transpose()) + t * xi_);
  return out;
}

Eigen::VectorXd SpikeSlabDenoiser::weight_gradient(const Eigen::VectorXd& theta) const {
  const auto [t, one_minus_t] = weights(theta);
  if (regime_ != Regime::kMixture) return Eigen::VectorXd::Zero(snapshots());
  return (t * one_minus_t) * (quad_ * theta);
}

Eigen::MatrixXd SpikeSlabDenoiser::jacobian(const Eigen::VectorXd& theta) const {
  const auto [t, one_minus_t] = weights(theta);
  Eigen::MatrixXd jac = t * gain_;
  if (regime_ == Regime::kMixture) {
    const Eigen::VectorXd grad = (t * one_minus_t) * (quad_ * theta);
    jac.noalias() += (gain_ * theta) * grad.transpose();
  }
  return jac;
}

// --- free functions ----------------------------------------------------------

double posterior_weight(const Eigen::VectorXd& theta, const PriorParams& prior,
                        const GaussianChannel& chan) {
  return SpikeSlabDenoiser(prior, chan).weight(theta);
}

Eigen::VectorXd posterior_mean(const Eigen::VectorXd& theta, const PriorParams& prior,
                               const GaussianChannel& chan) {
  return SpikeSlabDenoiser(prior, chan).mean(theta);
}

Eigen::MatrixXd posterior_cov(const Eigen::VectorXd& theta, const PriorParams& prior,
                              const GaussianChannel& chan) {
  return SpikeSlabDenoiser(prior, chan).denoise(theta).cov;
}

Eigen::VectorXd weight_gradient(const Eigen::VectorXd& theta, const PriorParams& prior,
                                const GaussianChannel& chan) {
  return SpikeSlabDenoiser(prior, chan).weight_gradient(theta);
}

Eigen::MatrixXd posterior_jacobian(const Eigen::VectorXd& theta, const PriorParams& prior,
                                   const GaussianChannel& chan) {
  return SpikeSlabDenoiser(prior, chan).jacobian(theta);
}

double scalar_log_odds(double norm2, int snapshots, double c, double epsilon) {
  if (!(c >= 0.0)) throw std::domain_error("scalar_shrinkage: c must be non-negative");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::domain_error("scalar_shrinkage: epsilon must lie in [0, 1]");
  }
  if (epsilon <= 0.0) return std::numeric_limits<double>::infinity();
  if (epsilon >= 1.0) return -std::numeric_limits<double>::infinity();
  c = std::max(c, kEigenFloor);
  return std::log((1.0 - epsilon) / epsilon) + 0.5 * snapshots * std::log1p(1.0 / c) -
         norm2 / (2.0 * c * (1.0 + c));
}

ShrinkageResult scalar_shrinkage(const Eigen::VectorXd& theta, double c, double epsilon) {
  const double lo = scalar_log_odds(theta.squaredNorm(), static_cast<int>(theta.size()), c,
                                    epsilon);
  ShrinkageResult out;
  out.weight = logistic_weight(lo);
  out.mean = (out.weight / (1.0 + std::max(c, kEigenFloor))) * theta;
  return out;
}

double hard_threshold_limit(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::domain_error("hard_threshold_limit: c must be positive and finite");
  }
  return c * (1.0 + c) * std::log1p(1.0 / c);
}

}  // namespace jsr
