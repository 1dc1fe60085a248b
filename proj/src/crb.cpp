#include "crbkit/crb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace crbkit {

const char* to_string(ConstraintKind kind) noexcept {
  switch (kind) {
    case ConstraintKind::None: return "none";
    case ConstraintKind::Affine: return "affine";
    case ConstraintKind::JacobianOnly: return "jacobian-only";
  }
  return "unknown";
}

namespace {

// With U orthonormal (n x k), the spectrum of U A U^T is that of the k x k
// matrix A followed by n - k zeros. Taking it from A avoids rounding noise on
// the zero eigenvalues, which scales with ||bound||.
EigenSpectrum padded_spectrum(const Vector& inner_desc, Eigen::Index n) {
  EigenSpectrum s;
  s.values = Vector::Zero(n);
  s.values.head(inner_desc.size()) = inner_desc;
  return s;
}

void fill_bound(CrbReport& report, SymMatrix bound, EigenSpectrum spectrum) {
  report.eigenvalues = std::move(spectrum);
  report.trace = bound.trace();
  report.bound = std::move(bound);
  report.exists = true;
}

}  // namespace

CrbReport unconstrained_crb(const SymMatrix& j, const Tolerances& tol) {
  CrbReport report;
  const RankedSvd svd = ranked_svd(j, tol.rank_tol_rel);
  report.fim_rank = svd.rank;
  report.singular_fim = svd.rank < j.dim();
  report.constraint_used = ConstraintKind::None;
  report.u_projector = SymMatrix::identity(j.dim());
  // Signed eigenvalues on the range basis; sigma alone drops the sign.
  Vector inner = (svd.u_r.transpose() * j.matrix() * svd.u_r).diagonal().cwiseInverse();
  std::sort(inner.begin(), inner.end(), std::greater<>());
  fill_bound(report, pinv_via_basis(j, tol.rank_tol_rel), padded_spectrum(inner, j.dim()));
  return report;
}

SymMatrix restricted_information(const SymMatrix& j, const NullBasis& u) {
  if (u.ambient_dim() != j.dim()) {
    throw Error(ErrorCode::InvalidInput, "tangent basis has " + std::to_string(u.ambient_dim()) +
                                             " rows, FIM is " + std::to_string(j.dim()) + "x" +
                                             std::to_string(j.dim()));
  }
  return SymMatrix(u.matrix().transpose() * j.matrix() * u.matrix());
}

bool restricted_nonsingular(const SymMatrix& w, double rank_tol_rel) {
  if (w.dim() == 0) return true;
  const EigenSpectrum spec = eigvals_desc(w);
  const double top = std::max(std::abs(spec.max()), std::abs(spec.min()));
  return top > 0.0 && spec.min() > rank_tol_rel * top;
}

CrbReport crb_from_basis(const SymMatrix& j, const NullBasis& u, const Tolerances& tol,
                         ConstraintKind kind) {
  CrbReport report;
  report.constraint_used = kind;
  report.fim_rank = ranked_svd(j, tol.rank_tol_rel).rank;
  report.singular_fim = report.fim_rank < j.dim();
  report.u_projector = u.projector();

  const SymMatrix w = restricted_information(j, u);
  if (!restricted_nonsingular(w, tol.rank_tol_rel)) {
    report.exists = false;
    return report;
  }
  if (w.dim() == 0) {
    fill_bound(report, SymMatrix::zero(j.dim()), padded_spectrum(Vector(), j.dim()));
    return report;
  }
  const Matrix solved = w.matrix().llt().solve(u.matrix().transpose());
  // eig(W^-1) descending = reciprocals of eig(W) ascending.
  const Vector inner = eigvals_desc(w).values.reverse().cwiseInverse();
  fill_bound(report, SymMatrix(u.matrix() * solved), padded_spectrum(inner, j.dim()));
  return report;
}

CrbReport constrained_crb(const SymMatrix& j, const Matrix& f_jac, const Tolerances& tol,
                          ConstraintKind kind) {
  if (f_jac.cols() != j.dim()) {
    throw Error(ErrorCode::InvalidInput, "constraint Jacobian has " + std::to_string(f_jac.cols()) +
                                             " columns, FIM dimension is " +
                                             std::to_string(j.dim()));
  }
  if (f_jac.rows() == 0) kind = ConstraintKind::None;
  return crb_from_basis(j, null_complement(f_jac, tol.rank_tol_rel), tol, kind);
}

bool crb_exists(const SymMatrix& j, const Matrix& f_jac, const Tolerances& tol) {
  if (f_jac.cols() != j.dim()) {
    throw Error(ErrorCode::InvalidInput, "constraint Jacobian width does not match FIM");
  }
  const NullBasis u = null_complement(f_jac, tol.rank_tol_rel);
  return restricted_nonsingular(restricted_information(j, u), tol.rank_tol_rel);
}

}  // namespace crbkit
