#pragma once

#include <Eigen/Dense>
#include <optional>

#include "crbkit/error.hpp"

namespace crbkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical thresholds shared by every rank, PSD and margin decision.
struct Tolerances {
  /// Singular values at or below sigma_max * n * rank_tol_rel count as zero.
  double rank_tol_rel = 1e-10;
  /// Absolute PSD slack. When unset, 1e-9 * sigma_max of the matrix tested.
  std::optional<double> psd_tol;
  /// Absolute slack on theorem margins (trace, eigenvalue, Frobenius).
  double margin_tol = 1e-9;
};

/// Dense real symmetric matrix. The input is symmetrized on construction as
/// (A + A^T) / 2, so entry (i, j) and (j, i) are bitwise equal afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Eigen::Index n);
  static SymMatrix identity(Eigen::Index n);
  static SymMatrix diagonal(const Vector& d);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator*(double s, const SymMatrix& a);

 private:
  Matrix m_;
};

/// Rank-revealing factorization of a symmetric matrix: range basis, positive
/// singular values in descending order, and orthonormal null-space basis.
struct RankedSvd {
  Matrix u_r;
  Vector sigma;
  Matrix u_bar;
  Eigen::Index rank = 0;

  Eigen::Index dim() const noexcept { return u_r.rows(); }
  Eigen::Index nullity() const noexcept { return u_bar.cols(); }
};

/// Eigenvalues in descending order.
struct EigenSpectrum {
  Vector values;

  Eigen::Index size() const noexcept { return values.size(); }
  double operator[](Eigen::Index i) const { return values(i); }
  double min() const { return values.size() ? values(values.size() - 1) : 0.0; }
  double max() const { return values.size() ? values(0) : 0.0; }
};

/// Orthonormal basis U of the kernel of a constraint Jacobian (F U = 0).
class NullBasis {
 public:
  explicit NullBasis(Matrix u) : u_(std::move(u)) {}

  const Matrix& matrix() const noexcept { return u_; }
  Eigen::Index ambient_dim() const noexcept { return u_.rows(); }
  Eigen::Index dim() const noexcept { return u_.cols(); }
  /// U U^T; unique for the subspace, unlike U itself.
  SymMatrix projector() const;

 private:
  Matrix u_;
};

RankedSvd ranked_svd(const SymMatrix& m, double rank_tol_rel = 1e-10);

/// U_r (U_r^T M U_r)^{-1} U_r^T, with U_r the range basis of M.
SymMatrix pinv_via_basis(const SymMatrix& m, double rank_tol_rel = 1e-10);

EigenSpectrum eigvals_desc(const SymMatrix& m);

/// min eigenvalue >= -psd_tol; psd_tol defaults to 1e-9 * sigma_max.
bool is_psd(const SymMatrix& m, std::optional<double> psd_tol = std::nullopt);

/// Numerical rank of a general matrix with cutoff sigma_max * max(r, c) * rank_tol_rel.
Eigen::Index numerical_rank(const Matrix& a, double rank_tol_rel = 1e-10);

/// Orthonormal n x (n - m) basis of ker(f_jac). Throws RankDeficientConstraint
/// if f_jac (m x n) does not have numerical rank m.
NullBasis null_complement(const Matrix& f_jac, double rank_tol_rel = 1e-10);

/// Throws InvalidMatrix if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace crbkit
