#include "crbkit/matlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace crbkit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::RankDeficientConstraint: return "RankDeficientConstraint";
    case ErrorCode::FullRankFim: return "FullRankFim";
    case ErrorCode::NotMinimumConstraint: return "NotMinimumConstraint";
    case ErrorCode::SingularRestriction: return "SingularRestriction";
    case ErrorCode::SamplingExhausted: return "SamplingExhausted";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DegenerateParameter: return "DegenerateParameter";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidMatrix, std::string(what) + " has non-finite entries");
  }
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::InvalidMatrix, "symmetric matrix must be square, got " +
                                              std::to_string(m.rows()) + "x" +
                                              std::to_string(m.cols()));
  }
  require_finite(m, "symmetric matrix");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.matrix() - b.matrix());
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.matrix() + b.matrix());
}

SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.matrix()); }

SymMatrix NullBasis::projector() const { return SymMatrix(u_ * u_.transpose()); }

RankedSvd ranked_svd(const SymMatrix& m, double rank_tol_rel) {
  if (!(rank_tol_rel > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "rank_tol_rel must be positive");
  }
  const Eigen::Index n = m.dim();
  RankedSvd out;
  if (n == 0) {
    out.u_r = Matrix(0, 0);
    out.u_bar = Matrix(0, 0);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");
  }
  // For a symmetric matrix the singular values are |lambda| and the left
  // singular vectors are the eigenvectors.
  const Vector abs_vals = eig.eigenvalues().cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return abs_vals(a) > abs_vals(b); });

  const double sigma_max = abs_vals(order.front());
  const double cutoff = sigma_max * static_cast<double>(n) * rank_tol_rel;
  Eigen::Index rank = 0;
  while (rank < n && abs_vals(order[static_cast<size_t>(rank)]) > cutoff) ++rank;

  out.rank = rank;
  out.u_r.resize(n, rank);
  out.sigma.resize(rank);
  out.u_bar.resize(n, n - rank);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index col = order[static_cast<size_t>(k)];
    if (k < rank) {
      out.u_r.col(k) = eig.eigenvectors().col(col);
      out.sigma(k) = abs_vals(col);
    } else {
      out.u_bar.col(k - rank) = eig.eigenvectors().col(col);
    }
  }
  return out;
}

SymMatrix pinv_via_basis(const SymMatrix& m, double rank_tol_rel) {
  const RankedSvd svd = ranked_svd(m, rank_tol_rel);
  const Eigen::Index n = m.dim();
  if (svd.rank == 0) return SymMatrix::zero(n);
  const Matrix inner = svd.u_r.transpose() * m.matrix() * svd.u_r;
  const Matrix sym_inner = 0.5 * (inner + inner.transpose());
  const Matrix solved = sym_inner.ldlt().solve(svd.u_r.transpose());
  return SymMatrix(svd.u_r * solved);
}

EigenSpectrum eigvals_desc(const SymMatrix& m) {
  EigenSpectrum out;
  if (m.dim() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix(), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");
  }
  out.values = eig.eigenvalues().reverse();
  return out;
}

bool is_psd(const SymMatrix& m, std::optional<double> psd_tol) {
  if (m.dim() == 0) return true;
  const EigenSpectrum spec = eigvals_desc(m);
  double tol = 0.0;
  if (psd_tol) {
    if (*psd_tol < 0.0) throw Error(ErrorCode::InvalidInput, "psd_tol must be nonnegative");
    tol = *psd_tol;
  } else {
    tol = 1e-9 * std::max(std::abs(spec.max()), std::abs(spec.min()));
  }
  return spec.min() >= -tol;
}

Eigen::Index numerical_rank(const Matrix& a, double rank_tol_rel) {
  if (a.size() == 0) return 0;
  require_finite(a, "matrix");
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double cutoff =
      s(0) * static_cast<double>(std::max(a.rows(), a.cols())) * rank_tol_rel;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return r;
}

NullBasis null_complement(const Matrix& f_jac, double rank_tol_rel) {
  const Eigen::Index m = f_jac.rows();
  const Eigen::Index n = f_jac.cols();
  require_finite(f_jac, "constraint Jacobian");
  if (m > n) {
    throw Error(ErrorCode::RankDeficientConstraint,
                "constraint Jacobian has more rows (" + std::to_string(m) +
                    ") than parameters (" + std::to_string(n) + ")");
  }
  if (m == 0) return NullBasis(Matrix::Identity(n, n));

  // The right singular vectors past the first m span ker(f_jac) when the
  // Jacobian has full row rank.
  Eigen::JacobiSVD<Matrix> svd(f_jac, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double cutoff = s(0) * static_cast<double>(n) * rank_tol_rel;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  if (r < m) {
    throw Error(ErrorCode::RankDeficientConstraint,
                "constraint Jacobian has numerical rank " + std::to_string(r) + " < " +
                    std::to_string(m) + " rows");
  }
  return NullBasis(svd.matrixV().rightCols(n - m));
}

}  // namespace crbkit
