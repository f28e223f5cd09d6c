#pragma once

// Reference computations that do not call into the library's closed forms:
// brute-force quadrature of the two-component posterior, finite differences
// and a dense Kronecker-form linear MMSE solve.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace oracle {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double weight = 0.0;
};

inline double gauss_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd w = llt.matrixL().solve(x);
  double logdet = 0.0;
  for (int i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double k = static_cast<double>(x.size());
  return std::exp(-0.5 * w.squaredNorm() - 0.5 * logdet - 0.5 * k * std::log(2.0 * std::numbers::pi));
}

// Tensor trapezoid rule over a box that holds the slab posterior. Only J = 1, 2.
inline Moments posterior_quadrature(const Eigen::VectorXd& theta, double eps,
                                    const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& sigma) {
  const int J = static_cast<int>(theta.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(lambda), es(sigma);
  const double lmax = el.eigenvalues().maxCoeff();
  const double post_min = 1.0 / (1.0 / el.eigenvalues().minCoeff() + 1.0 / es.eigenvalues().minCoeff());
  const double half = 2.0 * theta.norm() + 12.0 * std::sqrt(lmax);
  const double h = 0.4 * std::sqrt(post_min);
  const int n = static_cast<int>(std::ceil(2.0 * half / h)) + 1;
  const double step = 2.0 * half / (n - 1);

  const Eigen::LLT<Eigen::MatrixXd> ll(lambda), ls(sigma);
  double logdet_l = 0.0, logdet_s = 0.0;
  for (int i = 0; i < J; ++i) {
    logdet_l += 2.0 * std::log(ll.matrixL()(i, i));
    logdet_s += 2.0 * std::log(ls.matrixL()(i, i));
  }
  const double norm = -0.5 * (logdet_l + logdet_s) - J * std::log(2.0 * std::numbers::pi);

  double z = 0.0;
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(J);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(J, J);
  Eigen::VectorXd x(J);
  const auto accumulate = [&](double wq) {
    const double q = ll.matrixL().solve(x).squaredNorm() + ls.matrixL().solve(theta - x).squaredNorm();
    const double f = wq * std::exp(norm - 0.5 * q);
    z += f;
    m1 += f * x;
    m2 += f * x * x.transpose();
  };
  const auto wt = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 * step : step; };
  if (J == 1) {
    for (int i = 0; i < n; ++i) {
      x[0] = -half + i * step;
      accumulate(wt(i));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        x[0] = -half + i * step;
        x[1] = -half + j * step;
        accumulate(wt(i) * wt(j));
      }
    }
  }
  const double spike = gauss_density(theta, sigma);
  const double total = eps * z + (1.0 - eps) * spike;
  Moments out;
  out.weight = eps * z / total;
  out.mean = eps * m1 / total;
  out.cov = eps * m2 / total - out.mean * out.mean.transpose();
  return out;
}

// Richardson-extrapolated central differences, O(h^4).
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-3) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (int b = 0; b < x.size(); ++b) {
    const auto central = [&](double s) {
      Eigen::VectorXd xp = x, xm = x;
      xp[b] += s;
      xm[b] -= s;
      return Eigen::VectorXd((f(xp) - f(xm)) / (2.0 * s));
    };
    jac.col(b) = (4.0 * central(h / 2.0) - central(h)) / 3.0;
  }
  return jac;
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-3) {
  const auto wrapped = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(1);
    out[0] = f(v);
    return out;
  };
  return fd_jacobian(wrapped, x, h).row(0).transpose();
}

// Posterior mean of X (rows ~ N(0, Lambda)) from Y = Phi X + W, W iid N(0, sigma2).
// Unknowns stacked row by row: index n * J + j.
inline Eigen::MatrixXd linear_mmse(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                                   const Eigen::MatrixXd& lambda, double sigma2) {
  const int N = static_cast<int>(phi.cols());
  const int J = static_cast<int>(y.cols());
  const Eigen::MatrixXd gram = phi.transpose() * phi;
  const Eigen::MatrixXd lam_inv = lambda.inverse();
  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(N * J, N * J);
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      prec.block(a * J, b * J, J, J) = (gram(a, b) / sigma2) * Eigen::MatrixXd::Identity(J, J);
    }
    prec.block(a * J, a * J, J, J) += lam_inv;
  }
  const Eigen::MatrixXd rhs_m = phi.transpose() * y / sigma2;
  Eigen::VectorXd rhs(N * J);
  for (int a = 0; a < N; ++a) rhs.segment(a * J, J) = rhs_m.row(a).transpose();
  const Eigen::VectorXd sol = prec.ldlt().solve(rhs);
  Eigen::MatrixXd out(N, J);
  for (int a = 0; a < N; ++a) out.row(a) = sol.segment(a * J, J).transpose();
  return out;
}

inline double relative_sq_error(const Eigen::MatrixXd& est, const Eigen::MatrixXd& ref) {
  return (est - ref).squaredNorm() / ref.squaredNorm();
}

// SPD matrix with eigenvalues in [lo, hi] and a random orientation.
inline Eigen::MatrixXd random_spd(int J, double lo, double hi, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd a(J, J);
  for (int i = 0; i < J; ++i)
    for (int j = 0; j < J; ++j) a(i, j) = g(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(J);
  for (int i = 0; i < J; ++i) ev[i] = u(rng);
  const Eigen::MatrixXd m = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

inline Eigen::VectorXd random_vector(int J, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(J);
  for (int i = 0; i < J; ++i) v[i] = g(rng);
  return v;
}

}  // namespace oracle
