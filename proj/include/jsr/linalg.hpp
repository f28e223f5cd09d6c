#pragma once

#include <Eigen/Dense>

namespace jsr {

/// Eigenvalue floor applied to every noise covariance before it is inverted.
inline constexpr double kEigenFloor = 1e-12;

/// Relative tolerance used when checking that an input matrix is symmetric.
inline constexpr double kSymmetryTol = 1e-12;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol = kSymmetryTol);

/// Inverse and log-determinant of a symmetric matrix whose spectrum has been
/// clamped from below at `floor`. Eigenvalues below -1e-10 * max(1, |lambda|max)
/// are treated as a genuinely indefinite input and raise std::domain_error.
struct FlooredSpd {
  Eigen::MatrixXd matrix;   // floored matrix
  Eigen::MatrixXd inverse;
  double logdet = 0.0;
  bool floored = false;     // at least one eigenvalue was clamped
};

FlooredSpd floor_spd(const Eigen::MatrixXd& a, double floor = kEigenFloor);

/// Log-determinant of an SPD matrix through its Cholesky factor.
/// Throws std::domain_error when the factorization fails.
double spd_logdet(const Eigen::LLT<Eigen::MatrixXd>& llt);

/// Inverse of an SPD matrix via Cholesky, with the eigenvalue floor as a
/// fallback when the factorization breaks down.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, double floor = kEigenFloor);

}  // namespace jsr
