#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crbkit/constraint.hpp"
#include "crbkit/matlin.hpp"

namespace crbkit {

enum class TheoremId { TraceBound, EigenDominance, Poincare, Equivalence, MinRank, Counterexample };

const char* to_string(TheoremId id) noexcept;

/// A failing case, with enough input to replay it.
struct Witness {
  std::size_t case_index = 0;
  std::string description;
  std::vector<std::pair<std::string, Matrix>> matrices;
};

/// Outcome of checking one inequality over a set of cases. A case passes
/// when its margin is >= -tolerance; worst_margin is the minimum over cases.
struct TheoremCertificate {
  TheoremId id = TheoremId::TraceBound;
  bool passed = true;
  std::size_t n_cases = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::vector<Witness> witnesses;
  /// One extra headline number per certificate (e.g. min eigenvalue of D).
  std::string statistic_name;
  double statistic = std::numeric_limits<double>::quiet_NaN();

  void record(double margin, Witness witness);
};

/// Concatenates same-theorem certificates in order; case indices are offset.
TheoremCertificate merge(const std::vector<TheoremCertificate>& parts);

/// tr(constrained CRB) >= tr(J^dagger) for every spec. Each spec must be a
/// minimum constraint (NotMinimumConstraint otherwise).
TheoremCertificate verify_trace_bound(const SymMatrix& j, const std::vector<ConstraintSpec>& specs,
                                      const Tolerances& tol = {});

/// lambda_i(V (V^T J V)^{-1} V^T) >= lambda_i(J^dagger) for every i, where V is
/// orthonormal with rank(J) columns.
TheoremCertificate verify_eigen_dominance(const SymMatrix& j, const Matrix& v,
                                          const Tolerances& tol = {});

/// lambda_i(V^T J V) <= lambda_i(J) for i = 1..k, V orthonormal n x k.
TheoremCertificate verify_poincare(const SymMatrix& j, const Matrix& v, const Tolerances& tol = {});

/// Every full-row-rank F with F U_r = 0 gives the bound J^dagger (Frobenius,
/// within margin_tol). The affine offset -F theta0 is attached to each F.
TheoremCertificate verify_constraint_equivalence(const SymMatrix& j, const Vector& theta0,
                                                 const std::vector<Matrix>& alt_jacobians,
                                                 const Tolerances& tol = {});

/// For random F with m < n - rank(J) rows, U^T J U is singular; for the
/// optimal affine constraint (m = n - rank(J)) it is not. Margins are relative
/// eigenvalue slacks against rank_tol_rel, so the tolerance is zero.
TheoremCertificate verify_min_rank(const SymMatrix& j, std::size_t trials, std::uint64_t rng_seed,
                                   const Tolerances& tol = {});

struct CounterexampleFixture {
  SymMatrix j;
  Matrix v;
};

/// J = diag(1, 1, 0, 0) and the 4x2 frame V whose bound is not Loewner-above J^dagger.
CounterexampleFixture counterexample_fixture();

/// D = V (V^T J V)^{-1} V^T - J^dagger on the fixture is not PSD (lambda_min
/// < -1e-6) while the trace bound and eigenvalue dominance both hold.
TheoremCertificate counterexample_check(const Tolerances& tol = {});

struct SuiteOptions {
  std::uint64_t seed = 0;
  /// When set, the trace/eigen/Poincare/equivalence/min-rank checks run on
  /// this FIM only; otherwise on random singular FIMs.
  std::optional<SymMatrix> fim;
  std::size_t n_fims = 100;
  Eigen::Index max_dim = 8;
  std::size_t constraints_per_fim = 20;
  std::size_t equivalence_trials = 50;
  std::size_t min_rank_fims = 100;
  Eigen::Index min_rank_max_dim = 6;
  std::size_t min_rank_trials_per_fim = 1;
  unsigned workers = 1;
  Tolerances tol;
};

/// All six certificates, in TheoremId order.
std::vector<TheoremCertificate> run_certificate_suite(const SuiteOptions& options);

/// Random singular PSD matrix for suite case `index`: n uniform in
/// [2, max_dim], rank uniform in [1, n - 1].
SymMatrix suite_fim(std::uint64_t seed, std::string_view label, std::size_t index,
                    Eigen::Index max_dim);

}  // namespace crbkit
