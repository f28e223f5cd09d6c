#pragma once

// Generative model for the joint-sparse MMV problem
//
//   Y = Phi X + Z,   Phi in R^{M x N} sparse,   X in R^{N x J},
//
// where row n of X is b_n u_n with b_n ~ Bernoulli(eps) and u_n ~ N_J(0, Lambda).
//
// Phi is drawn entrywise: each (m, n) is kept with probability d / M and set
// to +-1/sqrt(d) with equal probability, so every column has expected sum of
// squares 1 and every row N / M. Tree-likeness of the factor graph is an
// asymptotic property and is not enforced at finite size; empty rows and
// columns are legal.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "jsr/prior_denoiser.hpp"

namespace jsr {

struct NoiseVariance {
  double value = 0.0;
};
struct SnrDb {
  double value = 0.0;
};
using NoiseSpec = std::variant<NoiseVariance, SnrDb>;

struct ModelConfig {
  int N = 100;
  int M = 50;
  int J = 3;
  int d = 20;
  PriorParams prior = PriorParams::isotropic(0.1, 3);
  NoiseSpec noise = SnrDb{30.0};
  std::uint64_t seed = 0;

  double delta() const { return static_cast<double>(M) / static_cast<double>(N); }
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

struct MatrixEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Sparse M x N operator with both row and column adjacency. Edges are stored
/// in row-major order; an edge id indexes per-edge message storage.
class SensingMatrix {
 public:
  SensingMatrix() = default;
  /// Entries may come in any order; duplicates and explicit zeros are rejected.
  SensingMatrix(int rows, int cols, std::vector<MatrixEntry> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(edges_.size()); }
  double delta() const { return static_cast<double>(rows_) / static_cast<double>(cols_); }

  std::span<const MatrixEntry> edges() const { return edges_; }
  const MatrixEntry& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  /// Edge ids of row m are the contiguous range [row_begin(m), row_end(m)).
  int row_begin(int m) const { return row_ptr_[static_cast<std::size_t>(m)]; }
  int row_end(int m) const { return row_ptr_[static_cast<std::size_t>(m) + 1]; }
  int row_degree(int m) const { return row_end(m) - row_begin(m); }

  /// Edge ids of column n, ordered by row.
  std::span<const int> col_edges(int n) const;
  int col_degree(int n) const;

  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;            // Phi x
  Eigen::MatrixXd multiply_transpose(const Eigen::MatrixXd& z) const;  // Phi^T z
  Eigen::VectorXd row_square_sums() const;
  Eigen::VectorXd col_square_sums() const;
  Eigen::MatrixXd to_dense() const;

  static SensingMatrix from_dense(const Eigen::MatrixXd& dense);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<MatrixEntry> edges_;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_ptr_{0};
  std::vector<int> col_edge_ids_;
};

struct SignalEnsemble {
  Eigen::MatrixXd X;         // N x J, row n is zero iff support[n] == 0
  Eigen::VectorXi support;   // N entries in {0, 1}
};

struct MeasurementSet {
  Eigen::MatrixXd Y;  // M x J
  double sigma2 = 0.0;
};

struct Instance {
  SensingMatrix phi;
  SignalEnsemble signal;
  MeasurementSet meas;
};

/// Per-measurement noise variance giving the requested SNR, with the signal
/// power of one measurement taken as eps * tr(Lambda) / J * (1 / delta).
double sigma2_from_snr(double snr_db, const PriorParams& prior, double delta);
double sigma2_from_snr(const ModelConfig& cfg);
/// Resolves cfg.noise to a variance.
double noise_variance(const ModelConfig& cfg);

SignalEnsemble gen_signal(const ModelConfig& cfg);
SensingMatrix gen_sensing_matrix(const ModelConfig& cfg);
MeasurementSet measure(const SensingMatrix& phi, const SignalEnsemble& signal, double sigma2,
                       std::uint64_t seed);
Instance generate_instance(const ModelConfig& cfg);

/// Degree-regular variant: every column has exactly d entries and every row
/// exactly d N / M, with random placement and signs. Row and column sums of
/// squares then equal N / M and 1 exactly. Requires M | d N and d <= M.
SensingMatrix gen_regular_sensing_matrix(int M, int N, int d, std::uint64_t seed);

}  // namespace jsr
