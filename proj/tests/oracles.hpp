#pragma once

// Test-only reference computations. These deliberately take different
// numerical routes from the library code they check.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Pseudoinverse from a general (non-symmetric) SVD: V diag(1/s) U^T over
/// singular values above s_max * n * rel.
inline Matrix pinv_full_svd(const Matrix& m, double rel = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  const double cutoff = s.size() ? s(0) * static_cast<double>(m.rows()) * rel : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Largest violation (relative Frobenius) of the four Moore-Penrose conditions.
inline double moore_penrose_residual(const Matrix& a, const Matrix& x) {
  const double na = std::max(a.norm(), 1e-300);
  const double nx = std::max(x.norm(), 1e-300);
  const double r1 = (a * x * a - a).norm() / na;
  const double r2 = (x * a * x - x).norm() / nx;
  const double r3 = ((a * x).transpose() - a * x).norm() / std::max((a * x).norm(), 1e-300);
  const double r4 = ((x * a).transpose() - x * a).norm() / std::max((x * a).norm(), 1e-300);
  if (a.norm() == 0.0) return x.norm();
  return std::max({r1, r2, r3, r4});
}

/// Eigenvalues (descending) via the general nonsymmetric solver.
inline Vector eigvals_general(const Matrix& m) {
  if (m.rows() == 0) return Vector();
  Eigen::EigenSolver<Matrix> es(m, false);
  Vector v = es.eigenvalues().real();
  std::sort(v.data(), v.data() + v.size(), std::greater<>());
  return v;
}

/// Kernel basis from full-pivot LU (not orthonormal).
inline Matrix lu_kernel(const Matrix& f, Eigen::Index n) {
  if (f.rows() == 0) return Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(f);
  Matrix k = lu.kernel();
  if (k.cols() == 1 && k.norm() == 0.0) return Matrix(n, 0);
  return k;
}

/// K (K^T J K)^{-1} K^T for any (not necessarily orthonormal) kernel basis K.
inline Matrix constrained_crb(const Matrix& j, const Matrix& f) {
  const Matrix k = lu_kernel(f, j.rows());
  if (k.cols() == 0) return Matrix::Zero(j.rows(), j.rows());
  const Matrix w = k.transpose() * j * k;
  return k * w.fullPivLu().inverse() * k.transpose();
}

/// Central-difference Jacobian of f at x with step h.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  Vector p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p(i) = x(i) + h;
    const Vector up = f(p);
    p(i) = x(i) - h;
    const Vector down = f(p);
    p(i) = x(i);
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

/// Direct-sum convolution from the definition y_k = sum_i s_i h_{k-i}.
inline Vector convolve_direct(const Vector& s, const Vector& h) {
  const Eigen::Index len = s.size() + h.size() - 1;
  Vector y(len);
  for (Eigen::Index k = 0; k < len; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const Eigen::Index jh = k - i;
      if (jh >= 0 && jh < h.size()) acc += s(i) * h(jh);
    }
    y(k) = acc;
  }
  return y;
}

/// Closed-form eigenvalues of the symmetric 2x2 [[a, b], [b, c]], descending.
inline std::pair<double, double> sym2x2_eigs(double a, double b, double c) {
  const double mid = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  return {mid + rad, mid - rad};
}

/// Minimum eigenvalue of a 4x4 symmetric matrix that decouples into the index
/// blocks {0, 2} and {1, 3}; NaN if the cross-block entries are not zero.
inline double two_block_min_eig(const Matrix& d, double coupling_tol = 1e-14) {
  for (int i : {0, 2})
    for (int k : {1, 3})
      if (std::abs(d(i, k)) > coupling_tol || std::abs(d(k, i)) > coupling_tol) return NAN;
  const auto even = sym2x2_eigs(d(0, 0), d(0, 2), d(2, 2));
  const auto odd = sym2x2_eigs(d(1, 1), d(1, 3), d(3, 3));
  return std::min(even.second, odd.second);
}

inline double rel_frob(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

}  // namespace oracle
