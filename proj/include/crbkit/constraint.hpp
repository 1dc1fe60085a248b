#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crbkit/matlin.hpp"

namespace crbkit {

/// A constraint f(theta) = 0 described by its Jacobian at the evaluation
/// point. Affine constraints also carry the offset C in f(theta) = F theta + C.
struct ConstraintSpec {
  Matrix f_jac;
  std::optional<Vector> offset;
  std::string label;
  /// Rejected draws before this one was accepted (sampled constraints only).
  std::size_t retries = 0;

  Eigen::Index rows() const noexcept { return f_jac.rows(); }
  Eigen::Index cols() const noexcept { return f_jac.cols(); }

  /// Shape checks, and f(theta0) = 0 to within `tol` when the offset is present.
  void validate(const std::optional<Vector>& theta0 = std::nullopt, double tol = 1e-9) const;
};

struct MinConstraintReport {
  bool full_rank_jacobian = false;  // rank F = m
  bool utju_nonsingular = false;    // U^T J U invertible
  bool rank_sum_is_n = false;       // rank F + rank J = n
  bool is_minimum = false;

  Eigen::Index rank_f = 0;
  Eigen::Index rank_j = 0;
  Eigen::Index n = 0;
  /// Smallest eigenvalue of U^T J U divided by its largest (NaN when req. 1 fails).
  double utju_min_ratio = 0.0;
};

MinConstraintReport check_minimum_constraint(const SymMatrix& j, const ConstraintSpec& spec,
                                             const Tolerances& tol = {});

/// F = U_bar^T (kernel basis of J), C = -F theta0. Throws FullRankFim when J is nonsingular.
ConstraintSpec optimal_affine_constraint(const SymMatrix& j, const Vector& theta0,
                                         const Tolerances& tol = {});

/// `count` minimum constraints of size (n - r) x n, each the transposed
/// orthonormalization of a Gaussian n x (n - r) matrix. Draws that fail
/// check_minimum_constraint are retried; SamplingExhausted after 100 * count
/// consecutive rejections.
std::vector<ConstraintSpec> sample_minimum_constraints(const SymMatrix& j, std::size_t count,
                                                       std::uint64_t rng_seed,
                                                       const Tolerances& tol = {});

}  // namespace crbkit
