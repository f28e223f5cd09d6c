#include "jsr/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace jsr {

NseValue nse_db(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("nse_db: shape mismatch");
  }
  const double signal = truth.squaredNorm();
  if (signal == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double err = (estimate - truth).squaredNorm();
  if (err == 0.0) return {kNseFloorDb, false};
  return {std::max(kNseFloorDb, 10.0 * std::log10(err / signal)), false};
}

SupportMetrics support_metrics(const Eigen::VectorXd& weights,
                               const Eigen::VectorXi& truth_support, double threshold) {
  if (weights.size() != truth_support.size()) {
    throw std::invalid_argument("support_metrics: size mismatch");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("support_metrics: threshold must lie in (0, 1)");
  }
  long detected = 0;
  long truth = 0;
  long hits = 0;
  for (Eigen::Index n = 0; n < weights.size(); ++n) {
    const bool d = weights[n] >= threshold;
    const bool s = truth_support[n] != 0;
    detected += d;
    truth += s;
    hits += d && s;
  }
  SupportMetrics out;
  out.precision = detected == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(detected);
  out.recall = truth == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth);
  return out;
}

}  // namespace jsr
