#pragma once

#include <Eigen/Dense>
#include <array>

namespace qocsim {

// Truncated harmonic-oscillator ladder operator a (n x n).
inline Eigen::MatrixXd annihilation_op(int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

// Dimensionless position quadrature a + a^dag (phi = phi_zpf * this).
inline Eigen::MatrixXd position_op(int n) {
  const Eigen::MatrixXd a = annihilation_op(n);
  return a + a.transpose();
}

// Real representation q = a^dag - a of the charge quadrature; the charge
// operator is n = i * n_zpf * q, so n^2 = -n_zpf^2 q^2 stays real.
inline Eigen::MatrixXd momentum_q_op(int n) {
  const Eigen::MatrixXd a = annihilation_op(n);
  return (a.transpose() - a).eval();
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Eigen::MatrixXd kron3(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& c) {
  return kron(a, kron(b, c));
}

}  // namespace qocsim
