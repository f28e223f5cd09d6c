#include "jsr/se.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "jsr/linalg.hpp"
#include "jsr/random.hpp"

namespace jsr {

double se_step_scalar(double c, double epsilon, double delta, double sigma2) {
  if (!(c >= 0.0)) throw std::domain_error("se: c must be nonnegative");
  if (!(delta > 0.0)) throw std::domain_error("se: delta must be positive");
  return sigma2 + (epsilon / delta) * c / (1.0 + c);
}

double se_initial_c(const PriorParams& prior, double delta, double sigma2) {
  if (!(delta > 0.0)) throw std::domain_error("se: delta must be positive");
  return sigma2 + prior.epsilon() * prior.lambda().trace() / (prior.snapshots() * delta);
}

FixedPointResult se_fixed_point(double epsilon, double delta, double sigma2, double tol,
                                double c1, long max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("se: tol must be positive");
  FixedPointResult out;
  double c = c1;
  double prev_step = std::numeric_limits<double>::quiet_NaN();
  out.error_estimate = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= max_iter; ++k) {
    const double next = se_step_scalar(c, epsilon, delta, sigma2);
    const double step = std::abs(next - c);
    c = next;
    out.iterations = k;
    if (step == 0.0) {
      out.error_estimate = 0.0;
    } else if (std::isfinite(prev_step) && prev_step > 0.0) {
      const double rho = step / prev_step;
      out.error_estimate =
          rho < 1.0 ? step * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
    }
    prev_step = step;
    if (out.error_estimate < tol) {
      out.converged = true;
      break;
    }
  }
  out.c_star = c;
  return out;
}

std::vector<double> se_predict_trace_from(double c1, double epsilon, double delta, double sigma2,
                                          int n_iters) {
  std::vector<double> out;
  if (n_iters <= 0) return out;
  out.reserve(static_cast<std::size_t>(n_iters));
  out.push_back(c1);
  for (int i = 1; i < n_iters; ++i) out.push_back(se_step_scalar(out.back(), epsilon, delta, sigma2));
  return out;
}

std::vector<double> se_predict_trace(double epsilon, double delta, double sigma2, int n_iters) {
  if (!(delta > 0.0)) throw std::domain_error("se: delta must be positive");
  return se_predict_trace_from(sigma2 + epsilon / delta, epsilon, delta, sigma2, n_iters);
}

SeMatrixState se_matrix_init(const PriorParams& prior, double delta, double sigma2,
                             int mc_samples) {
  if (!(delta > 0.0)) throw std::domain_error("se: delta must be positive");
  SeMatrixState s;
  s.Gamma = prior.row_covariance();
  s.Sigma = s.Gamma / delta;
  s.Sigma.diagonal().array() += sigma2;
  s.mc_samples = mc_samples;
  return s;
}

SeMatrixStep se_step_matrix(const SeMatrixState& state, const PriorParams& prior, double delta,
                            double sigma2, std::uint64_t seed, std::uint64_t step) {
  if (state.mc_samples < 1) throw std::invalid_argument("se: mc_samples must be positive");
  const int J = prior.snapshots();
  const GaussianChannel chan(state.Sigma);
  const SpikeSlabDenoiser den(prior, chan);
  const Eigen::MatrixXd noise_factor = Eigen::LLT<Eigen::MatrixXd>(chan.sigma()).matrixL();
  const Eigen::MatrixXd& slab_factor = prior.lambda_factor();

  const std::uint64_t key = derive_seed(seed, step);
  const RandomStream support(key, StreamId::kSupport);
  const RandomStream slab(key, StreamId::kSlab);
  const RandomStream noise(key, StreamId::kNoise);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(J, J);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(J, J);
  Eigen::VectorXd g(J);
  Eigen::VectorXd h(J);
  const auto n = static_cast<std::uint64_t>(state.mc_samples);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto base = k * static_cast<std::uint64_t>(J);
    for (int j = 0; j < J; ++j) {
      g[j] = slab.normal_at(base + static_cast<std::uint64_t>(j));
      h[j] = noise.normal_at(base + static_cast<std::uint64_t>(j));
    }
    Eigen::VectorXd theta = noise_factor * h;
    if (support.uniform_at(k) < prior.epsilon()) theta += slab_factor * g;
    const Eigen::MatrixXd v = den.denoise(theta).cov;
    sum += v;
    sum_sq += v.cwiseProduct(v);
  }
  const double nd = static_cast<double>(n);
  SeMatrixStep out;
  const Eigen::MatrixXd mean = sum / nd;
  if (n > 1) {
    const Eigen::MatrixXd var = ((sum_sq / nd - mean.cwiseProduct(mean)) * (nd / (nd - 1.0))).cwiseMax(0.0);
    out.gamma_stderr = (var / nd).cwiseSqrt();
  } else {
    out.gamma_stderr = Eigen::MatrixXd::Constant(J, J, std::numeric_limits<double>::infinity());
  }
  out.state.Gamma = symmetrize(mean);
  out.state.Sigma = out.state.Gamma / delta;
  out.state.Sigma.diagonal().array() += sigma2;
  out.state.mc_samples = state.mc_samples;
  out.low_sample_count = state.mc_samples < kMinMcSamples;
  return out;
}

std::vector<SeMatrixState> se_matrix_trace(const PriorParams& prior, double delta, double sigma2,
                                           int n_iters, std::uint64_t seed, int mc_samples) {
  std::vector<SeMatrixState> out;
  if (n_iters <= 0) return out;
  out.push_back(se_matrix_init(prior, delta, sigma2, mc_samples));
  for (int i = 1; i < n_iters; ++i) {
    out.push_back(se_step_matrix(out.back(), prior, delta, sigma2, seed,
                                 static_cast<std::uint64_t>(i))
                      .state);
  }
  return out;
}

WeightCheck mean_weight_check(double epsilon, double c, int snapshots, int n_samples,
                              std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::domain_error("se: epsilon must lie in [0, 1]");
  if (!(c > 0.0)) throw std::domain_error("se: c must be positive");
  if (snapshots < 1 || n_samples < 2) throw std::invalid_argument("se: need J >= 1 and n >= 2");
  const RandomStream support(seed, StreamId::kSupport);
  const RandomStream normal(seed, StreamId::kMonteCarlo);
  const double sd_slab = std::sqrt(1.0 + c);
  const double sd_spike = std::sqrt(c);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const auto ku = static_cast<std::uint64_t>(k);
    const double sd = support.uniform_at(ku) < epsilon ? sd_slab : sd_spike;
    double norm2 = 0.0;
    for (int j = 0; j < snapshots; ++j) {
      const double x = sd * normal.normal_at(ku * static_cast<std::uint64_t>(snapshots) +
                                             static_cast<std::uint64_t>(j));
      norm2 += x * x;
    }
    const double t = logistic_weight(scalar_log_odds(norm2, snapshots, c, epsilon));
    sum += t;
    sum_sq += t * t;
  }
  const double n = static_cast<double>(n_samples);
  WeightCheck out;
  out.estimate = sum / n;
  const double var = std::max(0.0, (sum_sq / n - out.estimate * out.estimate) * n / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace jsr
