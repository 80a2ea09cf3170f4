#pragma once

// Random matrices for the operator suites.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace opequiv::testing {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Haar-ish orthogonal factor via QR with a sign fix.
inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, n, n));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1;
  return q;
}

// Q1 diag(s) Q2^T with singular values spread over [1, cond].
inline Eigen::MatrixXd conditioned(std::mt19937_64& rng, int n, double cond) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = i == 0 ? 1.0 : (i == 1 ? cond : std::pow(cond, u(rng)));
  if (n == 1) s(0) = 1.0 + (cond - 1.0) * u(rng);
  return random_orthogonal(rng, n) * s.asDiagonal() * random_orthogonal(rng, n).transpose();
}

// m x n with a chosen rank, generic otherwise.
inline Eigen::MatrixXd with_rank(std::mt19937_64& rng, int m, int n, int r) {
  if (r == 0) return Eigen::MatrixXd::Zero(m, n);
  return gaussian(rng, m, r) * gaussian(rng, r, n);
}

}  // namespace opequiv::testing
