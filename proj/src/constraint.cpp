#include "crbkit/constraint.hpp"

#include <cmath>
#include <limits>

#include "crbkit/crb.hpp"
#include "crbkit/random.hpp"

namespace crbkit {

void ConstraintSpec::validate(const std::optional<Vector>& theta0, double tol) const {
  require_finite(f_jac, "constraint Jacobian");
  if (f_jac.rows() > f_jac.cols()) {
    throw Error(ErrorCode::InvalidInput, "constraint has more rows than parameters");
  }
  if (!offset) return;
  if (offset->size() != f_jac.rows()) {
    throw Error(ErrorCode::InvalidInput, "constraint offset length " +
                                             std::to_string(offset->size()) + " != rows " +
                                             std::to_string(f_jac.rows()));
  }
  if (theta0) {
    if (theta0->size() != f_jac.cols()) {
      throw Error(ErrorCode::InvalidInput, "evaluation point has wrong dimension");
    }
    const double residual =
        f_jac.rows() > 0 ? (f_jac * *theta0 + *offset).cwiseAbs().maxCoeff() : 0.0;
    if (!(residual <= tol)) {
      throw Error(ErrorCode::InvalidInput,
                  "affine constraint not satisfied at the evaluation point (|f| = " +
                      std::to_string(residual) + ")");
    }
  }
}

MinConstraintReport check_minimum_constraint(const SymMatrix& j, const ConstraintSpec& spec,
                                             const Tolerances& tol) {
  const Eigen::Index n = j.dim();
  if (spec.cols() != n) {
    throw Error(ErrorCode::InvalidInput, "constraint Jacobian has " + std::to_string(spec.cols()) +
                                             " columns, FIM dimension is " + std::to_string(n));
  }
  if (spec.rows() > n) {
    throw Error(ErrorCode::InvalidInput, "constraint has more rows than parameters");
  }
  require_finite(spec.f_jac, "constraint Jacobian");

  MinConstraintReport r;
  r.n = n;
  r.rank_f = numerical_rank(spec.f_jac, tol.rank_tol_rel);
  r.rank_j = ranked_svd(j, tol.rank_tol_rel).rank;
  r.full_rank_jacobian = r.rank_f == spec.rows();
  r.utju_min_ratio = std::numeric_limits<double>::quiet_NaN();
  if (r.full_rank_jacobian) {
    const NullBasis u = null_complement(spec.f_jac, tol.rank_tol_rel);
    const SymMatrix w = restricted_information(j, u);
    r.utju_nonsingular = restricted_nonsingular(w, tol.rank_tol_rel);
    if (w.dim() > 0) {
      const EigenSpectrum e = eigvals_desc(w);
      r.utju_min_ratio = e.max() > 0.0 ? e.min() / e.max() : 0.0;
    } else {
      r.utju_min_ratio = 1.0;
    }
  }
  r.rank_sum_is_n = r.rank_f + r.rank_j == n;
  r.is_minimum = r.full_rank_jacobian && r.utju_nonsingular && r.rank_sum_is_n;
  return r;
}

ConstraintSpec optimal_affine_constraint(const SymMatrix& j, const Vector& theta0,
                                         const Tolerances& tol) {
  if (theta0.size() != j.dim()) {
    throw Error(ErrorCode::InvalidInput, "evaluation point has dimension " +
                                             std::to_string(theta0.size()) + ", FIM is " +
                                             std::to_string(j.dim()));
  }
  require_finite(theta0, "evaluation point");
  const RankedSvd svd = ranked_svd(j, tol.rank_tol_rel);
  if (svd.rank == j.dim()) {
    throw Error(ErrorCode::FullRankFim, "FIM is nonsingular; no constraint needed");
  }
  ConstraintSpec spec;
  spec.f_jac = svd.u_bar.transpose();
  // + 0.0 keeps a zero offset from printing as -0.
  spec.offset = (-(spec.f_jac * theta0)).array() + 0.0;
  spec.label = "optimal-affine";
  return spec;
}

std::vector<ConstraintSpec> sample_minimum_constraints(const SymMatrix& j, std::size_t count,
                                                       std::uint64_t rng_seed,
                                                       const Tolerances& tol) {
  if (count < 1) throw Error(ErrorCode::InvalidInput, "constraint count must be at least 1");
  const Eigen::Index n = j.dim();
  const Eigen::Index rank = ranked_svd(j, tol.rank_tol_rel).rank;
  if (rank == n) throw Error(ErrorCode::FullRankFim, "FIM is nonsingular; nothing to constrain");
  const Eigen::Index m = n - rank;

  Rng rng = make_rng(rng_seed, "sample_minimum_constraints");
  std::vector<ConstraintSpec> out;
  out.reserve(count);
  const std::size_t max_rejections = 100 * count;
  std::size_t consecutive = 0;
  while (out.size() < count) {
    ConstraintSpec spec;
    spec.f_jac = random_orthonormal(n, m, rng).transpose();
    spec.label = "sampled-" + std::to_string(out.size());
    if (check_minimum_constraint(j, spec, tol).is_minimum) {
      spec.retries = consecutive;
      consecutive = 0;
      out.push_back(std::move(spec));
    } else if (++consecutive >= max_rejections) {
      throw Error(ErrorCode::SamplingExhausted,
                  std::to_string(consecutive) + " consecutive rejections; FIM near-degenerate");
    }
  }
  return out;
}

}  // namespace crbkit
