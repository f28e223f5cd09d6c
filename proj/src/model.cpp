#include "jsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "jsr/random.hpp"

namespace jsr {

void ModelConfig::validate() const {
  if (N < 1 || M < 1 || J < 1) {
    throw std::invalid_argument("ModelConfig: N, M and J must be positive");
  }
  if (d < 1 || d >= M) {
    throw std::invalid_argument("ModelConfig: d must satisfy 1 <= d < M (d=" +
                                std::to_string(d) + ", M=" + std::to_string(M) + ")");
  }
  if (prior.snapshots() != J) {
    throw std::invalid_argument("ModelConfig: prior dimension does not match J");
  }
  if (const auto* s2 = std::get_if<NoiseVariance>(&noise); s2 && !(s2->value >= 0.0)) {
    throw std::invalid_argument("ModelConfig: noise variance must be non-negative");
  }
  if (const auto* snr = std::get_if<SnrDb>(&noise); snr && std::isnan(snr->value)) {
    throw std::invalid_argument("ModelConfig: snr_db must not be NaN");
  }
}

// --- SensingMatrix -----------------------------------------------------------

SensingMatrix::SensingMatrix(int rows, int cols, std::vector<MatrixEntry> entries)
    : rows_(rows), cols_(cols), edges_(std::move(entries)) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("SensingMatrix: dimensions must be positive");
  }
  for (const auto& e : edges_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw std::invalid_argument("SensingMatrix: entry index out of range");
    }
    if (e.value == 0.0 || !std::isfinite(e.value)) {
      throw std::invalid_argument("SensingMatrix: stored values must be finite and non-zero");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].row == edges_[k - 1].row && edges_[k].col == edges_[k - 1].col) {
      throw std::invalid_argument("SensingMatrix: duplicate entry");
    }
  }

  row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  col_ptr_.assign(static_cast<std::size_t>(cols) + 1, 0);
  for (const auto& e : edges_) {
    ++row_ptr_[static_cast<std::size_t>(e.row) + 1];
    ++col_ptr_[static_cast<std::size_t>(e.col) + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());

  col_edge_ids_.resize(edges_.size());
  std::vector<int> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (int id = 0; id < nnz(); ++id) {
    const auto c = static_cast<std::size_t>(edges_[static_cast<std::size_t>(id)].col);
    col_edge_ids_[static_cast<std::size_t>(fill[c]++)] = id;
  }
}

std::span<const int> SensingMatrix::col_edges(int n) const {
  const auto b = static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(n)]);
  const auto e = static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(n) + 1]);
  return std::span<const int>(col_edge_ids_).subspan(b, e - b);
}

int SensingMatrix::col_degree(int n) const {
  return col_ptr_[static_cast<std::size_t>(n) + 1] - col_ptr_[static_cast<std::size_t>(n)];
}

Eigen::MatrixXd SensingMatrix::multiply(const Eigen::MatrixXd& x) const {
  if (x.rows() != cols_) throw std::invalid_argument("SensingMatrix::multiply: shape mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, x.cols());
  for (const auto& e : edges_) out.row(e.row) += e.value * x.row(e.col);
  return out;
}

Eigen::MatrixXd SensingMatrix::multiply_transpose(const Eigen::MatrixXd& z) const {
  if (z.rows() != rows_) {
    throw std::invalid_argument("SensingMatrix::multiply_transpose: shape mismatch");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cols_, z.cols());
  for (const auto& e : edges_) out.row(e.col) += e.value * z.row(e.row);
  return out;
}

Eigen::VectorXd SensingMatrix::row_square_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(rows_);
  for (const auto& e : edges_) s[e.row] += e.value * e.value;
  return s;
}

Eigen::VectorXd SensingMatrix::col_square_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(cols_);
  for (const auto& e : edges_) s[e.col] += e.value * e.value;
  return s;
}

Eigen::MatrixXd SensingMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, cols_);
  for (const auto& e : edges_) out(e.row, e.col) = e.value;
  return out;
}

SensingMatrix SensingMatrix::from_dense(const Eigen::MatrixXd& dense) {
  std::vector<MatrixEntry> entries;
  for (int m = 0; m < dense.rows(); ++m) {
    for (int n = 0; n < dense.cols(); ++n) {
      if (dense(m, n) != 0.0) entries.push_back({m, n, dense(m, n)});
    }
  }
  return SensingMatrix(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()),
                       std::move(entries));
}

// --- generation --------------------------------------------------------------

double sigma2_from_snr(double snr_db, const PriorParams& prior, double delta) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("sigma2_from_snr: snr_db must be a number above -inf");
  }
  const double J = static_cast<double>(prior.snapshots());
  const double signal_power = prior.epsilon() * prior.lambda().trace() / J / delta;
  return signal_power * std::pow(10.0, -snr_db / 10.0);
}

double sigma2_from_snr(const ModelConfig& cfg) {
  const auto* snr = std::get_if<SnrDb>(&cfg.noise);
  if (snr == nullptr) throw std::invalid_argument("sigma2_from_snr: config has no snr_db");
  return sigma2_from_snr(snr->value, cfg.prior, cfg.delta());
}

double noise_variance(const ModelConfig& cfg) {
  if (const auto* s2 = std::get_if<NoiseVariance>(&cfg.noise)) return s2->value;
  return sigma2_from_snr(cfg);
}

SignalEnsemble gen_signal(const ModelConfig& cfg) {
  cfg.validate();
  const RandomStream support(cfg.seed, StreamId::kSupport);
  const RandomStream slab(cfg.seed, StreamId::kSlab);
  const double eps = cfg.prior.epsilon();
  const Eigen::MatrixXd& L = cfg.prior.lambda_factor();

  SignalEnsemble out;
  out.X = Eigen::MatrixXd::Zero(cfg.N, cfg.J);
  out.support = Eigen::VectorXi::Zero(cfg.N);
  Eigen::VectorXd u(cfg.J);
  for (int n = 0; n < cfg.N; ++n) {
    if (!(support.uniform_at(static_cast<std::uint64_t>(n)) < eps)) continue;
    out.support[n] = 1;
    for (int j = 0; j < cfg.J; ++j) {
      u[j] = slab.normal_at(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(cfg.J) +
                            static_cast<std::uint64_t>(j));
    }
    out.X.row(n) = (L * u).transpose();
  }
  return out;
}

SensingMatrix gen_sensing_matrix(const ModelConfig& cfg) {
  cfg.validate();
  const RandomStream rng(cfg.seed, StreamId::kMatrix);
  const double keep = static_cast<double>(cfg.d) / static_cast<double>(cfg.M);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));

  std::vector<MatrixEntry> entries;
  entries.reserve(static_cast<std::size_t>(1.1 * keep * cfg.M * cfg.N) + 16);
  for (int m = 0; m < cfg.M; ++m) {
    for (int n = 0; n < cfg.N; ++n) {
      const auto k = 2 * (static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(cfg.N) +
                          static_cast<std::uint64_t>(n));
      if (!(rng.uniform_at(k) < keep)) continue;
      const double sign = rng.uniform_at(k + 1) < 0.5 ? -1.0 : 1.0;
      entries.push_back({m, n, sign * scale});
    }
  }
  return SensingMatrix(cfg.M, cfg.N, std::move(entries));
}

MeasurementSet measure(const SensingMatrix& phi, const SignalEnsemble& signal, double sigma2,
                       std::uint64_t seed) {
  if (signal.X.rows() != phi.cols()) {
    throw std::invalid_argument("measure: signal has " + std::to_string(signal.X.rows()) +
                                " rows but Phi has " + std::to_string(phi.cols()) + " columns");
  }
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("measure: sigma2 must be non-negative");

  MeasurementSet out;
  out.sigma2 = sigma2;
  out.Y = phi.multiply(signal.X);
  if (sigma2 > 0.0) {
    const RandomStream noise(seed, StreamId::kNoise);
    const double sd = std::sqrt(sigma2);
    const auto J = static_cast<std::uint64_t>(out.Y.cols());
    for (int m = 0; m < out.Y.rows(); ++m) {
      for (int j = 0; j < out.Y.cols(); ++j) {
        out.Y(m, j) += sd * noise.normal_at(static_cast<std::uint64_t>(m) * J +
                                            static_cast<std::uint64_t>(j));
      }
    }
  }
  return out;
}

Instance generate_instance(const ModelConfig& cfg) {
  Instance inst;
  inst.phi = gen_sensing_matrix(cfg);
  inst.signal = gen_signal(cfg);
  inst.meas = measure(inst.phi, inst.signal, noise_variance(cfg), cfg.seed);
  return inst;
}

SensingMatrix gen_regular_sensing_matrix(int M, int N, int d, std::uint64_t seed) {
  if (M < 1 || N < 1 || d < 1 || d > M) {
    throw std::invalid_argument("gen_regular_sensing_matrix: need 1 <= d <= M");
  }
  if ((static_cast<long long>(d) * N) % M != 0) {
    throw std::invalid_argument("gen_regular_sensing_matrix: M must divide d * N");
  }
  const int row_deg = static_cast<int>(static_cast<long long>(d) * N / M);
  if (row_deg > N) throw std::invalid_argument("gen_regular_sensing_matrix: row degree exceeds N");
  RandomStream rng(seed, StreamId::kMatrix);
  auto below = [&rng](std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
  };

  // Configuration model: column n owns stubs [n d, (n + 1) d); stub s is wired
  // to row rows[s]. A shuffled row-stub list is repaired by swaps until no
  // column touches the same row twice.
  const std::size_t total = static_cast<std::size_t>(d) * static_cast<std::size_t>(N);
  std::vector<int> rows(total);
  for (std::size_t s = 0; s < total; ++s) rows[s] = static_cast<int>(s / static_cast<std::size_t>(row_deg));
  for (std::size_t i = total - 1; i > 0; --i) std::swap(rows[i], rows[below(i + 1)]);

  const auto ud = static_cast<std::size_t>(d);
  auto col_has = [&](std::size_t col, int row, std::size_t skip) {
    for (std::size_t s = col * ud; s < (col + 1) * ud; ++s) {
      if (s != skip && rows[s] == row) return true;
    }
    return false;
  };
  for (int pass = 0;; ++pass) {
    if (pass > 1000) throw std::runtime_error("gen_regular_sensing_matrix: could not remove multi-edges");
    bool clean = true;
    for (std::size_t s = 0; s < total; ++s) {
      const std::size_t col = s / ud;
      if (!col_has(col, rows[s], s)) continue;
      clean = false;
      for (int attempt = 0; attempt < 10000; ++attempt) {
        const std::size_t o = below(total);
        const std::size_t other = o / ud;
        if (other == col) continue;
        if (col_has(col, rows[o], s) || col_has(other, rows[s], o)) continue;
        std::swap(rows[s], rows[o]);
        break;
      }
    }
    if (clean) break;
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<MatrixEntry> entries;
  entries.reserve(total);
  for (std::size_t s = 0; s < total; ++s) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    entries.push_back({rows[s], static_cast<int>(s / ud), sign * scale});
  }
  return SensingMatrix(M, N, std::move(entries));
}

}  // namespace jsr
