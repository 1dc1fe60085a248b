#pragma once

#include <optional>

#include "crbkit/matlin.hpp"

namespace crbkit {

enum class ConstraintKind { None, Affine, JacobianOnly };

const char* to_string(ConstraintKind kind) noexcept;

struct CrbReport {
  /// Absent when the restricted information U^T J U is singular.
  std::optional<SymMatrix> bound;
  bool exists = false;
  double trace = 0.0;
  EigenSpectrum eigenvalues;
  ConstraintKind constraint_used = ConstraintKind::None;
  /// U U^T for the tangent basis used (identity when unconstrained).
  SymMatrix u_projector;
  /// rank(J) < n: no unbiased estimator with finite variance exists without
  /// constraints. Informational; the bound is still reported.
  bool singular_fim = false;
  Eigen::Index fim_rank = 0;
};

/// J^dagger, computed through the range basis of J.
CrbReport unconstrained_crb(const SymMatrix& j, const Tolerances& tol = {});

/// U (U^T J U)^{-1} U^T with U = null_complement(f_jac). f_jac may have zero rows.
CrbReport constrained_crb(const SymMatrix& j, const Matrix& f_jac, const Tolerances& tol = {},
                          ConstraintKind kind = ConstraintKind::JacobianOnly);

/// Same bound for an explicit orthonormal tangent basis.
CrbReport crb_from_basis(const SymMatrix& j, const NullBasis& u, const Tolerances& tol = {},
                         ConstraintKind kind = ConstraintKind::JacobianOnly);

/// U^T J U has full numerical rank n - m (lambda_min > rank_tol_rel * lambda_max).
bool crb_exists(const SymMatrix& j, const Matrix& f_jac, const Tolerances& tol = {});

/// U^T J U for the kernel basis U of f_jac.
SymMatrix restricted_information(const SymMatrix& j, const NullBasis& u);

/// Whether a restricted information matrix is nonsingular under the relative test.
bool restricted_nonsingular(const SymMatrix& w, double rank_tol_rel);

}  // namespace crbkit
