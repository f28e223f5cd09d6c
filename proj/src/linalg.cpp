#include "jsr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jsr {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

FlooredSpd floor_spd(const Eigen::MatrixXd& a, double floor) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("floor_spd: matrix must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw std::domain_error("floor_spd: matrix has non-finite entries");
  }
  const Eigen::MatrixXd sym = symmetrize(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw std::domain_error("floor_spd: eigendecomposition failed");
  }
  Eigen::VectorXd values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -1e-10 * scale) {
    throw std::domain_error("floor_spd: matrix is not positive semi-definite");
  }

  FlooredSpd out;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values[k] < floor) {
      values[k] = floor;
      out.floored = true;
    }
  }
  const Eigen::MatrixXd& vecs = eig.eigenvectors();
  out.matrix = symmetrize(vecs * values.asDiagonal() * vecs.transpose());
  out.inverse = symmetrize(vecs * values.cwiseInverse().asDiagonal() * vecs.transpose());
  out.logdet = values.array().log().sum();
  return out;
}

double spd_logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("spd_logdet: Cholesky factorization failed");
  }
  const auto diag = llt.matrixLLT().diagonal();
  return 2.0 * diag.array().log().sum();
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, double floor) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    const double min_pivot = llt.matrixLLT().diagonal().minCoeff();
    if (min_pivot * min_pivot >= floor) {
      return symmetrize(llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols())));
    }
  }
  return floor_spd(a, floor).inverse;
}

}  // namespace jsr
