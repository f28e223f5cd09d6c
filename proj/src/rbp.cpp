#include "jsr/rbp.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>
#include <string>

#include "jsr/errors.hpp"
#include "jsr/linalg.hpp"

namespace jsr {

namespace {

std::size_t idx(int e) { return static_cast<std::size_t>(e); }

void check_dims(const SensingMatrix& phi, const MeasurementSet& meas, int J) {
  if (meas.Y.rows() != phi.rows()) throw std::invalid_argument("rbp: Y rows must equal M");
  if (meas.Y.cols() != J) throw std::invalid_argument("rbp: Y columns must equal J");
  if (!(meas.sigma2 >= 0.0)) throw std::invalid_argument("rbp: sigma2 must be nonnegative");
}

// z_n^m = y^m - sum_{q != n} Phi_mq mu_m^q for every edge.
Eigen::MatrixXd residual_messages(const SensingMatrix& phi, const MeasurementSet& meas,
                                  const Eigen::MatrixXd& mu) {
  const int J = static_cast<int>(mu.rows());
  Eigen::MatrixXd z(J, phi.nnz());
  Eigen::VectorXd row(J);
  for (int m = 0; m < phi.rows(); ++m) {
    row = meas.Y.row(m).transpose();
    for (int e = phi.row_begin(m); e < phi.row_end(m); ++e) row -= phi.edge(e).value * mu.col(e);
    for (int e = phi.row_begin(m); e < phi.row_end(m); ++e) {
      z.col(e) = row + phi.edge(e).value * mu.col(e);
    }
  }
  return z;
}

// Sigma_n^m = sigma^2 I + sum_{q != n} Phi_mq^2 Gamma_m^q for every edge.
std::vector<Eigen::MatrixXd> noise_messages(const SensingMatrix& phi, double sigma2,
                                            const std::vector<Eigen::MatrixXd>& gamma, int J) {
  std::vector<Eigen::MatrixXd> sigma(idx(phi.nnz()));
  Eigen::MatrixXd row(J, J);
  for (int m = 0; m < phi.rows(); ++m) {
    row = sigma2 * Eigen::MatrixXd::Identity(J, J);
    for (int e = phi.row_begin(m); e < phi.row_end(m); ++e) {
      const double v = phi.edge(e).value;
      row += v * v * gamma[idx(e)];
    }
    for (int e = phi.row_begin(m); e < phi.row_end(m); ++e) {
      const double v = phi.edge(e).value;
      sigma[idx(e)] = symmetrize(row - v * v * gamma[idx(e)]);
    }
  }
  return sigma;
}

void check_finite(const EdgeState& s, int sweep) {
  bool ok = s.mu.allFinite() && s.z.allFinite();
  for (const auto& g : s.gamma) ok = ok && g.allFinite();
  for (const auto& g : s.sigma) ok = ok && g.allFinite();
  if (s.shared_sigma.size() > 0) ok = ok && s.shared_sigma.allFinite();
  if (!ok) throw NumericalError("rbp: non-finite message after sweep " + std::to_string(sweep));
}

double relative_change(const Eigen::MatrixXd& now, const Eigen::MatrixXd& before) {
  const double diff = (now - before).norm();
  if (diff == 0.0) return 0.0;
  return diff / std::max(now.norm(), before.norm());
}

Eigen::MatrixXd shared_noise(const Eigen::MatrixXd& gamma, double sigma2, double delta) {
  Eigen::MatrixXd s = gamma / delta;
  s.diagonal().array() += sigma2;
  return symmetrize(s);
}

}  // namespace

void RbpConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("rbp: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("rbp: tol must be positive");
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("rbp: damping must lie in [0, 1)");
}

EdgeState rbp_init(const SensingMatrix& phi, const MeasurementSet& meas, const PriorParams& prior) {
  const int J = prior.snapshots();
  check_dims(phi, meas, J);
  EdgeState s;
  s.mu = Eigen::MatrixXd::Zero(J, phi.nnz());
  s.gamma.assign(idx(phi.nnz()), prior.row_covariance());
  s.z = residual_messages(phi, meas, s.mu);
  s.sigma = noise_messages(phi, meas.sigma2, s.gamma, J);
  s.shared_gamma = prior.row_covariance();
  s.shared_sigma = shared_noise(s.shared_gamma, meas.sigma2, phi.delta());
  return s;
}

EdgeState rbp_iterate_edge_dependent(const EdgeState& state, const SensingMatrix& phi,
                                     const MeasurementSet& meas, const PriorParams& prior,
                                     double damping) {
  const int J = prior.snapshots();
  const int E = phi.nnz();
  if (state.sigma.size() != idx(E) || state.gamma.size() != idx(E)) {
    throw std::invalid_argument("rbp: edge-dependent sweep needs per-edge Sigma and Gamma");
  }
  std::vector<Eigen::MatrixXd> prec(idx(E));  // Phi^2 Sigma^-1 per edge
  Eigen::MatrixXd info(J, E);                 // Phi Sigma^-1 z per edge
  for (int e = 0; e < E; ++e) {
    const double v = phi.edge(e).value;
    const Eigen::MatrixXd inv = spd_inverse(state.sigma[idx(e)]);
    prec[idx(e)] = (v * v) * inv;
    info.col(e) = v * (inv * state.z.col(e));
  }

  EdgeState next;
  next.mu.resize(J, E);
  next.gamma.resize(idx(E));
  Eigen::MatrixXd total_prec(J, J);
  Eigen::VectorXd total_info(J);
  for (int n = 0; n < phi.cols(); ++n) {
    const auto edges = phi.col_edges(n);
    if (edges.size() == 1) {
      next.mu.col(edges[0]).setZero();
      next.gamma[idx(edges[0])] = prior.row_covariance();
      continue;
    }
    total_prec.setZero();
    total_info.setZero();
    for (int e : edges) {
      total_prec += prec[idx(e)];
      total_info += info.col(e);
    }
    for (int e : edges) {
      const Eigen::MatrixXd cavity_sigma = spd_inverse(symmetrize(total_prec - prec[idx(e)]));
      const Eigen::VectorXd theta = cavity_sigma * (total_info - info.col(e));
      const SpikeSlabDenoiser den(prior, GaussianChannel(symmetrize(cavity_sigma)));
      DenoiseResult r = den.denoise(theta);
      next.mu.col(e) = r.mean;
      next.gamma[idx(e)] = std::move(r.cov);
    }
  }
  if (damping > 0.0) next.mu = (1.0 - damping) * next.mu + damping * state.mu;
  next.z = residual_messages(phi, meas, next.mu);
  next.sigma = noise_messages(phi, meas.sigma2, next.gamma, J);
  next.iter = state.iter + 1;
  check_finite(next, state.iter);
  return next;
}

std::pair<EdgeState, Eigen::MatrixXd> rbp_iterate_edge_independent(
    const EdgeState& state, const Eigen::MatrixXd& shared_sigma, const SensingMatrix& phi,
    const MeasurementSet& meas, const PriorParams& prior, const RbpConfig& cfg) {
  const int J = prior.snapshots();
  const int E = phi.nnz();
  const GaussianChannel chan(shared_sigma);
  const SpikeSlabDenoiser unit_den(prior, chan);

  EdgeState next;
  next.mu.resize(J, E);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(J, J);
  Eigen::VectorXd total(J);
  for (int n = 0; n < phi.cols(); ++n) {
    const auto edges = phi.col_edges(n);
    total.setZero();
    double col_sq = 0.0;
    for (int e : edges) {
      const double v = phi.edge(e).value;
      total += v * state.z.col(e);
      col_sq += v * v;
    }
    for (int e : edges) {
      const double v = phi.edge(e).value;
      const Eigen::VectorXd sum = total - v * state.z.col(e);
      if (!cfg.exact_cavity_scale) {
        const DenoiseResult r = unit_den.denoise(sum);
        next.mu.col(e) = r.mean;
        gamma += r.cov;
        continue;
      }
      if (edges.size() == 1) {
        next.mu.col(e).setZero();
        gamma += prior.row_covariance();
        continue;
      }
      const double scale = col_sq - v * v;
      const SpikeSlabDenoiser den(prior, GaussianChannel(chan.sigma() / scale));
      const DenoiseResult r = den.denoise(sum / scale);
      next.mu.col(e) = r.mean;
      gamma += r.cov;
    }
  }
  next.shared_gamma = E > 0 ? symmetrize(gamma / static_cast<double>(E))
                            : Eigen::MatrixXd(prior.row_covariance());
  next.shared_sigma = shared_noise(next.shared_gamma, meas.sigma2, phi.delta());
  if (cfg.damping > 0.0) next.mu = (1.0 - cfg.damping) * next.mu + cfg.damping * state.mu;
  next.z = residual_messages(phi, meas, next.mu);
  next.iter = state.iter + 1;
  check_finite(next, state.iter);
  Eigen::MatrixXd out_sigma = next.shared_sigma;
  return {std::move(next), std::move(out_sigma)};
}

Belief rbp_belief(const EdgeState& state, const SensingMatrix& phi, const PriorParams& prior,
                  const RbpConfig& cfg) {
  const int J = prior.snapshots();
  const int N = phi.cols();
  Belief b;
  b.estimate = Eigen::MatrixXd::Zero(N, J);
  b.weights = Eigen::VectorXd::Constant(N, prior.epsilon());

  if (cfg.variant == RbpVariant::kEdgeIndependent) {
    const GaussianChannel chan(state.shared_sigma);
    const SpikeSlabDenoiser unit_den(prior, chan);
    Eigen::VectorXd theta(J);
    for (int n = 0; n < N; ++n) {
      const auto edges = phi.col_edges(n);
      if (edges.empty()) continue;
      theta.setZero();
      double col_sq = 0.0;
      for (int e : edges) {
        theta += phi.edge(e).value * state.z.col(e);
        col_sq += phi.edge(e).value * phi.edge(e).value;
      }
      const DenoiseResult r =
          cfg.exact_cavity_scale
              ? SpikeSlabDenoiser(prior, GaussianChannel(chan.sigma() / col_sq)).denoise(theta / col_sq)
              : unit_den.denoise(theta);
      b.estimate.row(n) = r.mean.transpose();
      b.weights[n] = r.weight;
    }
    return b;
  }

  Eigen::MatrixXd prec(J, J);
  Eigen::VectorXd info(J);
  for (int n = 0; n < N; ++n) {
    const auto edges = phi.col_edges(n);
    if (edges.empty()) continue;
    prec.setZero();
    info.setZero();
    for (int e : edges) {
      const double v = phi.edge(e).value;
      const Eigen::MatrixXd inv = spd_inverse(state.sigma[idx(e)]);
      prec += (v * v) * inv;
      info += v * (inv * state.z.col(e));
    }
    const Eigen::MatrixXd post_sigma = symmetrize(spd_inverse(symmetrize(prec)));
    const SpikeSlabDenoiser den(prior, GaussianChannel(post_sigma));
    const DenoiseResult r = den.denoise(post_sigma * info);
    b.estimate.row(n) = r.mean.transpose();
    b.weights[n] = r.weight;
  }
  return b;
}

SolveResult rbp_solve(const SensingMatrix& phi, const MeasurementSet& meas,
                      const PriorParams& prior, const RbpConfig& cfg,
                      const Eigen::MatrixXd* truth) {
  cfg.validate();
  const int J = prior.snapshots();
  if (truth != nullptr && (truth->rows() != phi.cols() || truth->cols() != J)) {
    throw std::invalid_argument("rbp: truth has the wrong shape");
  }
  const bool dependent = cfg.variant == RbpVariant::kEdgeDependent;
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  EdgeState state = rbp_init(phi, meas, prior);
  if (!dependent) {
    state.gamma.clear();
    state.sigma.clear();
  }
  Belief belief{Eigen::MatrixXd::Zero(phi.cols(), J),
                Eigen::VectorXd::Constant(phi.cols(), prior.epsilon())};
  SolveResult out;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (dependent) {
      state = rbp_iterate_edge_dependent(state, phi, meas, prior, cfg.damping);
    } else {
      auto swept = rbp_iterate_edge_independent(state, state.shared_sigma, phi, meas, prior, cfg);
      state = std::move(swept.first);
    }
    Belief now = rbp_belief(state, phi, prior, cfg);
    const double change = relative_change(now.estimate, belief.estimate);
    belief = std::move(now);

    IterationRecord rec;
    rec.iteration = it;
    rec.nse_db = nan;
    rec.mse = nan;
    if (truth != nullptr) {
      rec.nse_db = nse_db(belief.estimate, *truth).db;
      rec.mse = (belief.estimate - *truth).squaredNorm() / static_cast<double>(belief.estimate.size());
    }
    if (dependent) {
      double st = 0.0;
      double gt = 0.0;
      for (const auto& s : state.sigma) st += s.trace();
      for (const auto& g : state.gamma) gt += g.trace();
      const double denom = static_cast<double>(std::max(phi.nnz(), 1)) * J;
      rec.sigma_trace = st / denom;
      rec.gamma_trace = gt / denom;
    } else {
      rec.sigma_trace = state.shared_sigma.trace() / J;
      rec.gamma_trace = state.shared_gamma.trace() / J;
    }
    rec.wallclock_us =
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
    out.trace.push_back(rec);
    out.iterations = it;
    if (change < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.estimate = std::move(belief.estimate);
  out.weights = std::move(belief.weights);
  return out;
}

}  // namespace jsr
