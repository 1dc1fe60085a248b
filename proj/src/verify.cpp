#include "crbkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "crbkit/crb.hpp"
#include "crbkit/random.hpp"

namespace crbkit {

const char* to_string(TheoremId id) noexcept {
  switch (id) {
    case TheoremId::TraceBound: return "trace_bound";
    case TheoremId::EigenDominance: return "eigen_dominance";
    case TheoremId::Poincare: return "poincare";
    case TheoremId::Equivalence: return "equivalence";
    case TheoremId::MinRank: return "min_rank";
    case TheoremId::Counterexample: return "counterexample";
  }
  return "unknown";
}

void TheoremCertificate::record(double margin, Witness witness) {
  witness.case_index = n_cases++;
  worst_margin = std::min(worst_margin, margin);
  // NaN margins count as failures.
  if (!(margin >= -tolerance)) {
    passed = false;
    witnesses.push_back(std::move(witness));
  }
}

TheoremCertificate merge(const std::vector<TheoremCertificate>& parts) {
  TheoremCertificate out;
  if (parts.empty()) return out;
  out.id = parts.front().id;
  out.tolerance = parts.front().tolerance;
  out.statistic_name = parts.front().statistic_name;
  for (const auto& p : parts) {
    for (auto w : p.witnesses) {
      w.case_index += out.n_cases;
      out.witnesses.push_back(std::move(w));
    }
    out.n_cases += p.n_cases;
    out.worst_margin = std::min(out.worst_margin, p.worst_margin);
    out.passed = out.passed && p.passed;
    if (!std::isnan(p.statistic)) {
      out.statistic = std::isnan(out.statistic) ? p.statistic : std::max(out.statistic, p.statistic);
    }
  }
  return out;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require_orthonormal(const Matrix& v, Eigen::Index n) {
  if (v.rows() != n) {
    throw Error(ErrorCode::InvalidInput, "frame has " + std::to_string(v.rows()) +
                                             " rows, expected " + std::to_string(n));
  }
  require_finite(v, "frame");
  if (v.cols() > n) throw Error(ErrorCode::InvalidInput, "frame wider than ambient space");
  if (v.cols() == 0) return;
  const double err =
      (v.transpose() * v - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw Error(ErrorCode::InvalidInput, "frame is not orthonormal (max |V^T V - I| = " +
                                             fmt(err) + ")");
  }
}

}  // namespace

TheoremCertificate verify_trace_bound(const SymMatrix& j, const std::vector<ConstraintSpec>& specs,
                                      const Tolerances& tol) {
  TheoremCertificate cert;
  cert.id = TheoremId::TraceBound;
  cert.tolerance = tol.margin_tol;
  cert.statistic_name = "trace_pinv";
  const double trace_pinv = pinv_via_basis(j, tol.rank_tol_rel).trace();
  cert.statistic = trace_pinv;
  for (const auto& spec : specs) {
    if (!check_minimum_constraint(j, spec, tol).is_minimum) {
      throw Error(ErrorCode::NotMinimumConstraint,
                  "constraint '" + spec.label + "' is not a minimum constraint");
    }
    const CrbReport crb = constrained_crb(
        j, spec.f_jac, tol, spec.offset ? ConstraintKind::Affine : ConstraintKind::JacobianOnly);
    const double margin = crb.exists ? crb.trace - trace_pinv : -std::numeric_limits<double>::infinity();
    cert.record(margin, Witness{0,
                                "constraint '" + spec.label + "': tr(CRB) - tr(J+) = " + fmt(margin),
                                {{"J", j.matrix()}, {"F", spec.f_jac}}});
  }
  return cert;
}

TheoremCertificate verify_eigen_dominance(const SymMatrix& j, const Matrix& v,
                                          const Tolerances& tol) {
  require_orthonormal(v, j.dim());
  const Eigen::Index rank = ranked_svd(j, tol.rank_tol_rel).rank;
  if (v.cols() != rank) {
    throw Error(ErrorCode::InvalidInput, "frame has " + std::to_string(v.cols()) +
                                             " columns, rank(J) is " + std::to_string(rank));
  }
  const CrbReport crb = crb_from_basis(j, NullBasis(v), tol);
  if (!crb.exists) {
    throw Error(ErrorCode::SingularRestriction, "V^T J V is numerically singular");
  }
  const EigenSpectrum pinv_spec = unconstrained_crb(j, tol).eigenvalues;

  TheoremCertificate cert;
  cert.id = TheoremId::EigenDominance;
  cert.tolerance = tol.margin_tol;
  double margin = std::numeric_limits<double>::infinity();
  Eigen::Index worst_index = 0;
  for (Eigen::Index i = 0; i < j.dim(); ++i) {
    const double m = crb.eigenvalues[i] - pinv_spec[i];
    if (m < margin) {
      margin = m;
      worst_index = i;
    }
  }
  cert.record(margin, Witness{0,
                              "lambda_" + std::to_string(worst_index + 1) +
                                  " dominance margin " + fmt(margin),
                              {{"J", j.matrix()}, {"V", v}}});
  return cert;
}

TheoremCertificate verify_poincare(const SymMatrix& j, const Matrix& v, const Tolerances& tol) {
  require_orthonormal(v, j.dim());
  const EigenSpectrum full = eigvals_desc(j);
  const EigenSpectrum restricted = eigvals_desc(SymMatrix(v.transpose() * j.matrix() * v));

  TheoremCertificate cert;
  cert.id = TheoremId::Poincare;
  cert.tolerance = tol.margin_tol;
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    margin = std::min(margin, full[i] - restricted[i]);
  }
  if (v.cols() == 0) margin = 0.0;
  cert.record(margin, Witness{0, "separation margin " + fmt(margin),
                              {{"J", j.matrix()}, {"V", v}}});
  return cert;
}

TheoremCertificate verify_constraint_equivalence(const SymMatrix& j, const Vector& theta0,
                                                 const std::vector<Matrix>& alt_jacobians,
                                                 const Tolerances& tol) {
  if (theta0.size() != j.dim()) {
    throw Error(ErrorCode::InvalidInput, "evaluation point has wrong dimension");
  }
  const RankedSvd svd = ranked_svd(j, tol.rank_tol_rel);
  const SymMatrix pinv = pinv_via_basis(j, tol.rank_tol_rel);
  const Eigen::Index n = j.dim();

  TheoremCertificate cert;
  cert.id = TheoremId::Equivalence;
  cert.tolerance = tol.margin_tol;
  cert.statistic_name = "max_frobenius_gap";
  cert.statistic = 0.0;
  for (std::size_t k = 0; k < alt_jacobians.size(); ++k) {
    const Matrix& f = alt_jacobians[k];
    if (f.cols() != n || f.rows() != n - svd.rank) {
      throw Error(ErrorCode::InvalidInput, "alternative Jacobian " + std::to_string(k) +
                                               " must be " + std::to_string(n - svd.rank) + "x" +
                                               std::to_string(n));
    }
    require_finite(f, "alternative Jacobian");
    if (numerical_rank(f, tol.rank_tol_rel) != f.rows()) {
      throw Error(ErrorCode::InvalidInput,
                  "alternative Jacobian " + std::to_string(k) + " lacks full row rank");
    }
    const double leak = (f * svd.u_r).norm();
    if (leak > 1e-8 * std::max(1.0, f.norm())) {
      throw Error(ErrorCode::InvalidInput, "alternative Jacobian " + std::to_string(k) +
                                               " does not annihilate the range of J (|F U_r| = " +
                                               fmt(leak) + ")");
    }
    ConstraintSpec spec{f, Vector(-(f * theta0)), "alt-" + std::to_string(k), 0};
    spec.validate(theta0);
    const CrbReport crb = constrained_crb(j, f, tol, ConstraintKind::Affine);
    const double gap = crb.exists ? (crb.bound->matrix() - pinv.matrix()).norm()
                                  : std::numeric_limits<double>::infinity();
    cert.statistic = std::max(cert.statistic, gap);
    cert.record(-gap, Witness{0, "alternative " + std::to_string(k) + ": |CRB - J+|_F = " + fmt(gap),
                              {{"J", j.matrix()}, {"F", f}}});
  }
  return cert;
}

namespace {

double relative_min_eig(const SymMatrix& w) {
  if (w.dim() == 0) return 1.0;
  const EigenSpectrum e = eigvals_desc(w);
  const double top = std::max(std::abs(e.max()), std::abs(e.min()));
  return top > 0.0 ? e.min() / top : 0.0;
}

}  // namespace

TheoremCertificate verify_min_rank(const SymMatrix& j, std::size_t trials, std::uint64_t rng_seed,
                                   const Tolerances& tol) {
  const Eigen::Index n = j.dim();
  const Eigen::Index rank = ranked_svd(j, tol.rank_tol_rel).rank;
  if (rank >= n) throw Error(ErrorCode::InvalidInput, "min-rank check needs a singular FIM");
  const Eigen::Index nullity = n - rank;

  TheoremCertificate cert;
  cert.id = TheoremId::MinRank;
  cert.tolerance = 0.0;
  cert.statistic_name = "max_rel_min_eig_undersized";
  cert.statistic = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(rng_seed, "verify_min_rank", t);
    std::uniform_int_distribution<Eigen::Index> pick_m(0, nullity - 1);
    const Eigen::Index m = pick_m(rng);
    Matrix f = gaussian_matrix(m, n, rng);
    while (numerical_rank(f, tol.rank_tol_rel) != m) f = gaussian_matrix(m, n, rng);
    const SymMatrix w = restricted_information(j, null_complement(f, tol.rank_tol_rel));
    const double ratio = relative_min_eig(w);
    cert.statistic = std::max(cert.statistic, ratio);
    // Singular means ratio <= rank_tol_rel.
    const double margin = tol.rank_tol_rel - ratio;
    cert.record(margin, Witness{0,
                                "m = " + std::to_string(m) + " < " + std::to_string(nullity) +
                                    " but U^T J U nonsingular (rel. min eig " + fmt(ratio) + ")",
                                {{"J", j.matrix()}, {"F", f}}});
  }

  const ConstraintSpec opt = optimal_affine_constraint(j, Vector::Zero(n), tol);
  const double ratio = relative_min_eig(restricted_information(j, null_complement(opt.f_jac)));
  cert.record(ratio - tol.rank_tol_rel,
              Witness{0, "optimal constraint with m = " + std::to_string(nullity) +
                             " gives singular U^T J U (rel. min eig " + fmt(ratio) + ")",
                      {{"J", j.matrix()}, {"F", opt.f_jac}}});
  return cert;
}

CounterexampleFixture counterexample_fixture() {
  Vector d(4);
  d << 1.0, 1.0, 0.0, 0.0;
  Matrix v(4, 2);
  v << -1.0, 1.0,
       -1.0, -1.0,
       -1.0, 1.0,
       -1.0, -1.0;
  return {SymMatrix::diagonal(d), 0.5 * v};
}

TheoremCertificate counterexample_check(const Tolerances& tol) {
  const auto [j, v] = counterexample_fixture();
  const SymMatrix pinv = pinv_via_basis(j, tol.rank_tol_rel);
  const CrbReport crb = crb_from_basis(j, NullBasis(v), tol);
  const SymMatrix d = *crb.bound - pinv;
  const double min_eig = eigvals_desc(d).min();

  // Constraint whose kernel is span(V): the orthogonal complement of V.
  Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeFullU);
  ConstraintSpec spec{svd.matrixU().rightCols(2).transpose(), std::nullopt, "counterexample-frame", 0};

  const TheoremCertificate trace = verify_trace_bound(j, {spec}, tol);
  const TheoremCertificate dominance = verify_eigen_dominance(j, v, tol);

  TheoremCertificate cert;
  cert.id = TheoremId::Counterexample;
  cert.tolerance = tol.margin_tol;
  cert.statistic_name = "min_eig_D";
  cert.statistic = min_eig;
  // The fixture must break the Loewner order but respect both weaker claims.
  const double not_psd_margin = -1e-6 - min_eig;
  const double margin = std::min({not_psd_margin, trace.worst_margin, dominance.worst_margin});
  const bool loewner_fails = !is_psd(d, tol.psd_tol);
  cert.record(loewner_fails ? margin : -std::numeric_limits<double>::infinity(),
              Witness{0,
                      "min eig(D) = " + fmt(min_eig) + ", trace margin " +
                          fmt(trace.worst_margin) + ", dominance margin " +
                          fmt(dominance.worst_margin),
                      {{"J", j.matrix()}, {"V", v}, {"D", d.matrix()}}});
  return cert;
}

SymMatrix suite_fim(std::uint64_t seed, std::string_view label, std::size_t index,
                    Eigen::Index max_dim) {
  if (max_dim < 2) throw Error(ErrorCode::InvalidInput, "suite dimension must be at least 2");
  Rng rng = make_rng(seed, label, index);
  std::uniform_int_distribution<Eigen::Index> pick_n(2, max_dim);
  const Eigen::Index n = pick_n(rng);
  std::uniform_int_distribution<Eigen::Index> pick_r(1, n - 1);
  const Eigen::Index r = pick_r(rng);
  return random_psd(n, r, rng);
}

namespace {

// Runs body(i) for i in [0, count) on up to `workers` threads. Results are
// written by index, so the caller's reduction order is fixed.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct PerFim {
  TheoremCertificate trace, dominance, poincare;
  double optimal_gap = 0.0;
};

PerFim certify_fim(const SymMatrix& j, std::size_t count, std::uint64_t seed,
                   const Tolerances& tol) {
  PerFim out;
  std::vector<ConstraintSpec> specs = sample_minimum_constraints(j, count, seed, tol);
  out.trace = verify_trace_bound(j, specs, tol);

  std::vector<TheoremCertificate> dom, poi;
  for (const auto& spec : specs) {
    const Matrix u = null_complement(spec.f_jac, tol.rank_tol_rel).matrix();
    dom.push_back(verify_eigen_dominance(j, u, tol));
    poi.push_back(verify_poincare(j, u, tol));
  }
  out.dominance = merge(dom);
  out.poincare = merge(poi);
  out.dominance.id = TheoremId::EigenDominance;
  out.poincare.id = TheoremId::Poincare;

  const ConstraintSpec opt = optimal_affine_constraint(j, Vector::Zero(j.dim()), tol);
  out.optimal_gap = std::abs(verify_trace_bound(j, {opt}, tol).worst_margin);
  return out;
}

Matrix row_space_transform(const Matrix& u_bar_t, Rng& rng) {
  const Eigen::Index k = u_bar_t.rows();
  for (;;) {
    const Matrix a = gaussian_matrix(k, k, rng);
    Eigen::JacobiSVD<Matrix> svd(a);
    const Vector& s = svd.singularValues();
    if (s(k - 1) > 1e-3 * s(0)) return a * u_bar_t;
  }
}

}  // namespace

std::vector<TheoremCertificate> run_certificate_suite(const SuiteOptions& options) {
  const Tolerances& tol = options.tol;
  const bool single = options.fim.has_value();
  const std::size_t fims = single ? 1 : options.n_fims;

  std::vector<PerFim> per(fims);
  parallel_for(fims, options.workers, [&](std::size_t i) {
    const SymMatrix j = single ? *options.fim : suite_fim(options.seed, "suite_fim", i, options.max_dim);
    per[i] = certify_fim(j, options.constraints_per_fim,
                         derive_seed(options.seed, "suite_constraints", i), tol);
  });

  std::vector<TheoremCertificate> trace, dom, poi;
  double optimal_gap = 0.0;
  for (auto& p : per) {
    trace.push_back(std::move(p.trace));
    dom.push_back(std::move(p.dominance));
    poi.push_back(std::move(p.poincare));
    optimal_gap = std::max(optimal_gap, p.optimal_gap);
  }

  std::vector<TheoremCertificate> eq(options.equivalence_trials);
  parallel_for(options.equivalence_trials, options.workers, [&](std::size_t t) {
    const SymMatrix j =
        single ? *options.fim : suite_fim(options.seed, "suite_equivalence_fim", t, options.max_dim);
    Rng rng = make_rng(options.seed, "suite_equivalence", t);
    const RankedSvd svd = ranked_svd(j, tol.rank_tol_rel);
    const Vector theta0 = gaussian_matrix(j.dim(), 1, rng);
    eq[t] = verify_constraint_equivalence(j, theta0,
                                          {row_space_transform(svd.u_bar.transpose(), rng)}, tol);
  });

  const std::size_t mr_fims = single ? 1 : options.min_rank_fims;
  const std::size_t mr_trials =
      single ? options.min_rank_fims * options.min_rank_trials_per_fim : options.min_rank_trials_per_fim;
  std::vector<TheoremCertificate> mr(mr_fims);
  parallel_for(mr_fims, options.workers, [&](std::size_t i) {
    const SymMatrix j = single ? *options.fim
                               : suite_fim(options.seed, "suite_min_rank_fim", i, options.min_rank_max_dim);
    mr[i] = verify_min_rank(j, mr_trials, derive_seed(options.seed, "suite_min_rank", i), tol);
  });

  std::vector<TheoremCertificate> out;
  out.push_back(merge(trace));
  out.back().id = TheoremId::TraceBound;
  out.back().statistic_name = "max_optimal_trace_gap";
  out.back().statistic = optimal_gap;
  out.push_back(merge(dom));
  out.back().id = TheoremId::EigenDominance;
  out.push_back(merge(poi));
  out.back().id = TheoremId::Poincare;
  out.push_back(merge(eq));
  out.back().id = TheoremId::Equivalence;
  out.push_back(merge(mr));
  out.back().id = TheoremId::MinRank;
  out.push_back(counterexample_check(tol));
  return out;
}

}  // namespace crbkit
