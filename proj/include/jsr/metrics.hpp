#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace jsr {

/// Reported in place of -inf when the estimate equals the truth exactly.
inline constexpr double kNseFloorDb = -200.0;

struct NseValue {
  double db = 0.0;
  bool zero_truth = false;  // truth identically zero: db is +inf
};

/// 10 log10(|estimate - truth|_F^2 / |truth|_F^2), floored at kNseFloorDb.
NseValue nse_db(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

struct SupportMetrics {
  double precision = 1.0;
  double recall = 1.0;
};

/// Precision and recall of {n : weights[n] >= threshold} against truth_support.
/// An empty detection set has precision 1; an empty true support has recall 1.
SupportMetrics support_metrics(const Eigen::VectorXd& weights,
                               const Eigen::VectorXi& truth_support, double threshold = 0.5);

/// Per-iteration diagnostics shared by every solver.
struct IterationRecord {
  int iteration = 0;
  double nse_db = 0.0;       // NaN when no ground truth was supplied
  double mse = 0.0;          // |estimate - truth|_F^2 / (N J), NaN without truth
  double sigma_trace = 0.0;  // tr(Sigma(i)) / J
  double gamma_trace = 0.0;  // tr(Gamma(i)) / J
  std::int64_t wallclock_us = 0;
};

struct SolveResult {
  Eigen::MatrixXd estimate;  // N x J
  Eigen::VectorXd weights;   // per-row support weight t of the final belief
  std::vector<IterationRecord> trace;
  int iterations = 0;
  bool converged = false;
};

}  // namespace jsr
