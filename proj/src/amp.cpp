#include "jsr/amp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsr/errors.hpp"
#include "jsr/linalg.hpp"

namespace jsr {

namespace {

void check_dims(const SensingMatrix& phi, const MeasurementSet& meas, int J) {
  if (meas.Y.rows() != phi.rows()) throw std::invalid_argument("amp: Y rows must equal M");
  if (meas.Y.cols() != J) throw std::invalid_argument("amp: Y columns must equal J");
  if (!(meas.sigma2 >= 0.0)) throw std::invalid_argument("amp: sigma2 must be nonnegative");
}

void check_finite(const AmpState& s, int sweep) {
  const auto bad = [](const Eigen::MatrixXd& m) { return !m.allFinite(); };
  if (bad(s.mu) || bad(s.theta) || bad(s.z) || bad(s.Sigma) || bad(s.Gamma)) {
    throw NumericalError("amp: non-finite state after sweep " + std::to_string(sweep));
  }
}

Eigen::MatrixXd effective_noise(const Eigen::MatrixXd& gamma, double sigma2, double delta) {
  Eigen::MatrixXd sigma = gamma / delta;
  sigma.diagonal().array() += sigma2;
  return symmetrize(sigma);
}

double relative_change(const Eigen::MatrixXd& now, const Eigen::MatrixXd& before) {
  const double diff = (now - before).norm();
  if (diff == 0.0) return 0.0;
  const double scale = std::max(now.norm(), before.norm());
  return diff / scale;
}

}  // namespace

void AmpConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("amp: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("amp: tol must be positive");
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("amp: damping must lie in [0, 1)");
}

AmpState amp_init(const SensingMatrix& phi, const MeasurementSet& meas, const PriorParams& prior) {
  const int J = prior.snapshots();
  check_dims(phi, meas, J);
  AmpState s;
  s.mu = Eigen::MatrixXd::Zero(phi.cols(), J);
  s.z = meas.Y;
  s.Gamma = prior.row_covariance();
  s.Sigma = effective_noise(s.Gamma, meas.sigma2, phi.delta());
  s.theta = phi.multiply_transpose(s.z);
  s.weights = Eigen::VectorXd::Constant(phi.cols(), prior.epsilon());
  s.iter = 1;
  return s;
}

AmpState amp_iterate(const AmpState& state, const SensingMatrix& phi, const MeasurementSet& meas,
                     const PriorParams& prior, const AmpConfig& cfg) {
  const int N = phi.cols();
  const int M = phi.rows();
  const int J = prior.snapshots();
  const SpikeSlabDenoiser den(prior, GaussianChannel(state.Sigma));

  AmpState next;
  next.mu.resize(N, J);
  next.weights.resize(N);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(J, J);
  // Per-row Jacobians, N * J^2 doubles.
  std::vector<Eigen::MatrixXd> jac(cfg.onsager ? static_cast<std::size_t>(N) : 0);
  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd theta = state.theta.row(n).transpose();
    const DenoiseResult r = den.denoise(theta);
    next.mu.row(n) = r.mean.transpose();
    next.weights[n] = r.weight;
    gamma += r.cov;
    if (cfg.onsager) jac[static_cast<std::size_t>(n)] = den.jacobian(theta);
  }
  next.Gamma = symmetrize(gamma / static_cast<double>(N));
  next.Sigma = effective_noise(next.Gamma, meas.sigma2, phi.delta());
  if (cfg.damping > 0.0) next.mu = (1.0 - cfg.damping) * next.mu + cfg.damping * state.mu;

  next.z = meas.Y - phi.multiply(next.mu);
  if (cfg.onsager) {
    Eigen::MatrixXd acc(J, J);
    for (int m = 0; m < M; ++m) {
      acc.setZero();
      for (int e = phi.row_begin(m); e < phi.row_end(m); ++e) {
        const MatrixEntry& en = phi.edge(e);
        acc.noalias() += (en.value * en.value) * jac[static_cast<std::size_t>(en.col)];
      }
      next.z.row(m).noalias() += (acc.transpose() * state.z.row(m).transpose()).transpose();
    }
  }
  next.theta = phi.multiply_transpose(next.z) + next.mu;
  next.iter = state.iter + 1;
  check_finite(next, state.iter);
  return next;
}

AmpState amp_iterate_uncorrelated(const AmpState& state, const SensingMatrix& phi,
                                  const MeasurementSet& meas, double epsilon,
                                  const AmpConfig& cfg) {
  const int N = phi.cols();
  const int M = phi.rows();
  const int J = static_cast<int>(state.theta.cols());
  const double c = std::max(state.Sigma(0, 0), kEigenFloor);

  AmpState next;
  next.mu.resize(N, J);
  next.weights.resize(N);
  Eigen::VectorXd slope(N);  // tr(eta') / J per row
  double tsum = 0.0;
  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd theta = state.theta.row(n).transpose();
    const ShrinkageResult r = scalar_shrinkage(theta, c, epsilon);
    next.mu.row(n) = r.mean.transpose();
    next.weights[n] = r.weight;
    tsum += r.weight;
    const double t = r.weight;
    slope[n] = (t + t * (1.0 - t) * theta.squaredNorm() / (J * c * (1.0 + c))) / (1.0 + c);
  }
  const double eps_i = tsum / static_cast<double>(N);
  const double gamma = cfg.fast_path_rank_one ? c * slope.mean() : c / (1.0 + c) * eps_i;
  next.Gamma = gamma * Eigen::MatrixXd::Identity(J, J);
  next.Sigma = (meas.sigma2 + gamma / phi.delta()) * Eigen::MatrixXd::Identity(J, J);
  if (cfg.damping > 0.0) next.mu = (1.0 - cfg.damping) * next.mu + cfg.damping * state.mu;

  next.z = meas.Y - phi.multiply(next.mu);
  if (cfg.onsager) {
    for (int m = 0; m < M; ++m) {
      double b = 0.0;
      for (int e = phi.row_begin(m); e < phi.row_end(m); ++e) {
        const MatrixEntry& en = phi.edge(e);
        b += en.value * en.value * slope[en.col];
      }
      next.z.row(m) += b * state.z.row(m);
    }
  }
  next.theta = phi.multiply_transpose(next.z) + next.mu;
  next.iter = state.iter + 1;
  check_finite(next, state.iter);
  return next;
}

SolveResult amp_solve(const SensingMatrix& phi, const MeasurementSet& meas,
                      const PriorParams& prior, const AmpConfig& cfg,
                      const Eigen::MatrixXd* truth) {
  cfg.validate();
  if (cfg.fast_path && !prior.unit_isotropic()) {
    throw std::invalid_argument("amp: fast path requires Lambda = I");
  }
  const int J = prior.snapshots();
  if (truth != nullptr && (truth->rows() != phi.cols() || truth->cols() != J)) {
    throw std::invalid_argument("amp: truth has the wrong shape");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  AmpState state = amp_init(phi, meas, prior);
  SolveResult out;
  out.trace.reserve(static_cast<std::size_t>(cfg.max_iter));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= cfg.max_iter; ++it) {
    AmpState next = cfg.fast_path ? amp_iterate_uncorrelated(state, phi, meas, prior.epsilon(), cfg)
                                  : amp_iterate(state, phi, meas, prior, cfg);
    const double change = relative_change(next.mu, state.mu);
    state = std::move(next);

    IterationRecord rec;
    rec.iteration = it;
    rec.nse_db = nan;
    rec.mse = nan;
    if (truth != nullptr) {
      rec.nse_db = nse_db(state.mu, *truth).db;
      rec.mse = (state.mu - *truth).squaredNorm() / static_cast<double>(state.mu.size());
    }
    rec.sigma_trace = state.Sigma.trace() / J;
    rec.gamma_trace = state.Gamma.trace() / J;
    rec.wallclock_us =
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
    out.trace.push_back(rec);
    out.iterations = it;
    if (change < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.estimate = state.mu;
  out.weights = state.weights;
  return out;
}

}  // namespace jsr
