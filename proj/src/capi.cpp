#include "crbkit/crbkit.h"

#include <filesystem>
#include <memory>
#include <string>

#include "crbkit/constraint.hpp"
#include "crbkit/crb.hpp"
#include "crbkit/fim.hpp"
#include "crbkit/io.hpp"
#include "crbkit/matlin.hpp"
#include "crbkit/run.hpp"
#include "crbkit/statmodel.hpp"
#include "crbkit/verify.hpp"

struct crbkit_matrix {
  crbkit::Matrix m;
};

struct crbkit_config {
  crbkit::RunConfig config;
};

struct crbkit_result {
  crbkit::RunResult result;
};

namespace {

thread_local std::string g_last_error;

crbkit_status status_for(crbkit::ErrorCode code) {
  using crbkit::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidMatrix: return CRBKIT_ERR_INVALID_MATRIX;
    case ErrorCode::InvalidInput: return CRBKIT_ERR_INVALID_INPUT;
    case ErrorCode::InvalidModel: return CRBKIT_ERR_INVALID_MODEL;
    case ErrorCode::RankDeficientConstraint: return CRBKIT_ERR_RANK_DEFICIENT_CONSTRAINT;
    case ErrorCode::FullRankFim: return CRBKIT_ERR_FULL_RANK_FIM;
    case ErrorCode::NotMinimumConstraint: return CRBKIT_ERR_NOT_MINIMUM_CONSTRAINT;
    case ErrorCode::SingularRestriction: return CRBKIT_ERR_SINGULAR_RESTRICTION;
    case ErrorCode::SamplingExhausted: return CRBKIT_ERR_SAMPLING_EXHAUSTED;
    case ErrorCode::NumericalFailure: return CRBKIT_ERR_NUMERICAL_FAILURE;
    case ErrorCode::DegenerateParameter: return CRBKIT_ERR_DEGENERATE_PARAMETER;
    case ErrorCode::IoError: return CRBKIT_ERR_IO;
  }
  return CRBKIT_ERR_INTERNAL;
}

template <class F>
crbkit_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return CRBKIT_OK;
  } catch (const crbkit::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CRBKIT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CRBKIT_ERR_INTERNAL;
  }
}

crbkit_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return CRBKIT_ERR_NULL_ARGUMENT;
}

crbkit::Tolerances to_tol(const crbkit_tolerances* t) {
  crbkit::Tolerances out;
  if (!t) return out;
  out.rank_tol_rel = t->rank_tol_rel;
  out.margin_tol = t->margin_tol;
  if (t->psd_tol > 0.0) out.psd_tol = t->psd_tol;
  if (!(out.rank_tol_rel > 0.0) || !(out.margin_tol > 0.0)) {
    throw crbkit::Error(crbkit::ErrorCode::InvalidInput, "tolerances must be positive");
  }
  return out;
}

crbkit_matrix* wrap(crbkit::Matrix m) { return new crbkit_matrix{std::move(m)}; }

}  // namespace

#define CRBKIT_REQUIRE(p) \
  if (!(p)) return null_arg(#p)

extern "C" {

const char* crbkit_version(void) { return crbkit::kVersion; }

const char* crbkit_last_error(void) { return g_last_error.c_str(); }

const char* crbkit_status_name(crbkit_status status) {
  switch (status) {
    case CRBKIT_OK: return "ok";
    case CRBKIT_ERR_NULL_ARGUMENT: return "null argument";
    case CRBKIT_ERR_INVALID_MATRIX: return "invalid matrix";
    case CRBKIT_ERR_INVALID_INPUT: return "invalid input";
    case CRBKIT_ERR_INVALID_MODEL: return "invalid model";
    case CRBKIT_ERR_RANK_DEFICIENT_CONSTRAINT: return "rank-deficient constraint";
    case CRBKIT_ERR_FULL_RANK_FIM: return "full-rank FIM";
    case CRBKIT_ERR_NOT_MINIMUM_CONSTRAINT: return "not a minimum constraint";
    case CRBKIT_ERR_SINGULAR_RESTRICTION: return "singular restriction";
    case CRBKIT_ERR_SAMPLING_EXHAUSTED: return "sampling exhausted";
    case CRBKIT_ERR_NUMERICAL_FAILURE: return "numerical failure";
    case CRBKIT_ERR_DEGENERATE_PARAMETER: return "degenerate parameter";
    case CRBKIT_ERR_IO: return "i/o error";
    case CRBKIT_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case CRBKIT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

crbkit_tolerances crbkit_default_tolerances(void) {
  const crbkit::Tolerances t;
  return {t.rank_tol_rel, 0.0, t.margin_tol};
}

crbkit_status crbkit_matrix_create(size_t rows, size_t cols, const double* data,
                                   crbkit_matrix** out) {
  CRBKIT_REQUIRE(out);
  if (rows * cols > 0) CRBKIT_REQUIRE(data);
  return guard([&] {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    crbkit::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (rows * cols > 0) {
      m = Eigen::Map<const RowMajor>(data, static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
    }
    *out = wrap(std::move(m));
  });
}

void crbkit_matrix_free(crbkit_matrix* m) { delete m; }

crbkit_status crbkit_matrix_shape(const crbkit_matrix* m, size_t* rows, size_t* cols) {
  CRBKIT_REQUIRE(m);
  CRBKIT_REQUIRE(rows);
  CRBKIT_REQUIRE(cols);
  *rows = static_cast<size_t>(m->m.rows());
  *cols = static_cast<size_t>(m->m.cols());
  return CRBKIT_OK;
}

crbkit_status crbkit_matrix_get(const crbkit_matrix* m, size_t row, size_t col, double* value) {
  CRBKIT_REQUIRE(m);
  CRBKIT_REQUIRE(value);
  if (row >= static_cast<size_t>(m->m.rows()) || col >= static_cast<size_t>(m->m.cols())) {
    g_last_error = "matrix index out of range";
    return CRBKIT_ERR_INVALID_INPUT;
  }
  *value = m->m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  return CRBKIT_OK;
}

crbkit_status crbkit_matrix_copy(const crbkit_matrix* m, double* data, size_t len) {
  CRBKIT_REQUIRE(m);
  const size_t need = static_cast<size_t>(m->m.size());
  if (need == 0) return CRBKIT_OK;
  CRBKIT_REQUIRE(data);
  if (len < need) {
    g_last_error = "buffer holds " + std::to_string(len) + " values, need " + std::to_string(need);
    return CRBKIT_ERR_BUFFER_TOO_SMALL;
  }
  size_t k = 0;
  for (Eigen::Index i = 0; i < m->m.rows(); ++i)
    for (Eigen::Index j = 0; j < m->m.cols(); ++j) data[k++] = m->m(i, j);
  return CRBKIT_OK;
}

crbkit_status crbkit_matrix_load(const char* path, crbkit_matrix** out) {
  CRBKIT_REQUIRE(path);
  CRBKIT_REQUIRE(out);
  return guard([&] { *out = wrap(crbkit::io::read_matx(std::filesystem::path(path))); });
}

crbkit_status crbkit_matrix_save(const crbkit_matrix* m, const char* path) {
  CRBKIT_REQUIRE(m);
  CRBKIT_REQUIRE(path);
  return guard([&] { crbkit::io::write_matx(std::filesystem::path(path), m->m); });
}

crbkit_status crbkit_rank(const crbkit_matrix* j, double rank_tol_rel, size_t* rank) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(rank);
  return guard([&] {
    *rank = static_cast<size_t>(crbkit::ranked_svd(crbkit::SymMatrix(j->m), rank_tol_rel).rank);
  });
}

crbkit_status crbkit_pinv(const crbkit_matrix* j, double rank_tol_rel, crbkit_matrix** out) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(out);
  return guard([&] {
    *out = wrap(crbkit::pinv_via_basis(crbkit::SymMatrix(j->m), rank_tol_rel).matrix());
  });
}

crbkit_status crbkit_eigvals(const crbkit_matrix* j, crbkit_matrix** out) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(out);
  return guard([&] { *out = wrap(crbkit::eigvals_desc(crbkit::SymMatrix(j->m)).values); });
}

crbkit_status crbkit_is_psd(const crbkit_matrix* m, double psd_tol, int* result) {
  CRBKIT_REQUIRE(m);
  CRBKIT_REQUIRE(result);
  return guard([&] {
    const std::optional<double> tol = psd_tol > 0.0 ? std::optional<double>(psd_tol) : std::nullopt;
    *result = crbkit::is_psd(crbkit::SymMatrix(m->m), tol) ? 1 : 0;
  });
}

crbkit_status crbkit_null_complement(const crbkit_matrix* f_jac, double rank_tol_rel,
                                     crbkit_matrix** out) {
  CRBKIT_REQUIRE(f_jac);
  CRBKIT_REQUIRE(out);
  return guard([&] { *out = wrap(crbkit::null_complement(f_jac->m, rank_tol_rel).matrix()); });
}

crbkit_status crbkit_unconstrained_crb(const crbkit_matrix* j, const crbkit_tolerances* tol,
                                       crbkit_matrix** bound, int* singular_fim) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(bound);
  return guard([&] {
    const crbkit::CrbReport r = crbkit::unconstrained_crb(crbkit::SymMatrix(j->m), to_tol(tol));
    *bound = wrap(r.bound->matrix());
    if (singular_fim) *singular_fim = r.singular_fim ? 1 : 0;
  });
}

crbkit_status crbkit_constrained_crb(const crbkit_matrix* j, const crbkit_matrix* f_jac,
                                     const crbkit_tolerances* tol, crbkit_matrix** bound,
                                     int* exists) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(f_jac);
  CRBKIT_REQUIRE(bound);
  return guard([&] {
    const crbkit::CrbReport r =
        crbkit::constrained_crb(crbkit::SymMatrix(j->m), f_jac->m, to_tol(tol));
    *bound = r.exists ? wrap(r.bound->matrix()) : nullptr;
    if (exists) *exists = r.exists ? 1 : 0;
  });
}

crbkit_status crbkit_optimal_constraint(const crbkit_matrix* j, const double* theta0, size_t n,
                                        const crbkit_tolerances* tol, crbkit_matrix** f_jac,
                                        crbkit_matrix** offset) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(f_jac);
  if (n > 0) CRBKIT_REQUIRE(theta0);
  return guard([&] {
    const crbkit::Vector t =
        n ? crbkit::Vector(Eigen::Map<const crbkit::Vector>(theta0, static_cast<Eigen::Index>(n)))
          : crbkit::Vector();
    const crbkit::ConstraintSpec spec =
        crbkit::optimal_affine_constraint(crbkit::SymMatrix(j->m), t, to_tol(tol));
    std::unique_ptr<crbkit_matrix> f(wrap(spec.f_jac));
    if (offset) *offset = wrap(*spec.offset);
    *f_jac = f.release();
  });
}

crbkit_status crbkit_check_minimum_constraint(const crbkit_matrix* j, const crbkit_matrix* f_jac,
                                              const crbkit_tolerances* tol, int* is_minimum,
                                              unsigned* flags) {
  CRBKIT_REQUIRE(j);
  CRBKIT_REQUIRE(f_jac);
  CRBKIT_REQUIRE(is_minimum);
  return guard([&] {
    crbkit::ConstraintSpec spec;
    spec.f_jac = f_jac->m;
    const auto r = crbkit::check_minimum_constraint(crbkit::SymMatrix(j->m), spec, to_tol(tol));
    *is_minimum = r.is_minimum ? 1 : 0;
    if (flags) {
      *flags = (r.full_rank_jacobian ? 1u : 0u) | (r.utju_nonsingular ? 2u : 0u) |
               (r.rank_sum_is_n ? 4u : 0u);
    }
  });
}

crbkit_status crbkit_blind_channel_fim(const double* theta, size_t s_len, size_t h_len,
                                       double noise_var, crbkit_matrix** out) {
  CRBKIT_REQUIRE(theta);
  CRBKIT_REQUIRE(out);
  return guard([&] {
    const crbkit::ChannelDims dims{static_cast<Eigen::Index>(s_len),
                                   static_cast<Eigen::Index>(h_len)};
    const crbkit::BlindChannelModel model(dims, noise_var);
    const crbkit::Vector t = Eigen::Map<const crbkit::Vector>(theta, dims.param_dim());
    *out = wrap(crbkit::fim_gaussian_mean(model, t).matrix.matrix());
  });
}

crbkit_status crbkit_ambiguity_direction(const double* theta, size_t s_len, size_t h_len,
                                         double* direction) {
  CRBKIT_REQUIRE(theta);
  CRBKIT_REQUIRE(direction);
  return guard([&] {
    const crbkit::ChannelDims dims{static_cast<Eigen::Index>(s_len),
                                   static_cast<Eigen::Index>(h_len)};
    const crbkit::Vector t = Eigen::Map<const crbkit::Vector>(theta, dims.param_dim());
    const crbkit::Vector d = crbkit::scalar_ambiguity_direction(t, dims);
    for (Eigen::Index i = 0; i < d.size(); ++i) direction[i] = d(i);
  });
}

crbkit_status crbkit_counterexample_check(const crbkit_tolerances* tol, int* passed,
                                          double* min_eig) {
  CRBKIT_REQUIRE(passed);
  return guard([&] {
    const auto cert = crbkit::counterexample_check(to_tol(tol));
    *passed = cert.passed ? 1 : 0;
    if (min_eig) *min_eig = cert.statistic;
  });
}

crbkit_status crbkit_config_create(crbkit_config** out) {
  CRBKIT_REQUIRE(out);
  return guard([&] { *out = new crbkit_config{}; });
}

void crbkit_config_free(crbkit_config* cfg) { delete cfg; }

crbkit_status crbkit_config_set(crbkit_config* cfg, const char* key, const char* value) {
  CRBKIT_REQUIRE(cfg);
  CRBKIT_REQUIRE(key);
  CRBKIT_REQUIRE(value);
  return guard([&] { cfg->config.set(key, value); });
}

crbkit_status crbkit_config_load(crbkit_config* cfg, const char* path) {
  CRBKIT_REQUIRE(cfg);
  CRBKIT_REQUIRE(path);
  return guard([&] { cfg->config.load(path); });
}

crbkit_status crbkit_run(const crbkit_config* cfg, crbkit_result** out) {
  CRBKIT_REQUIRE(cfg);
  CRBKIT_REQUIRE(out);
  return guard([&] { *out = new crbkit_result{crbkit::run_command(cfg->config)}; });
}

void crbkit_result_free(crbkit_result* r) { delete r; }

int crbkit_result_exit_code(const crbkit_result* r) {
  return r ? r->result.exit_code : crbkit::kExitNumerical;
}

const char* crbkit_result_summary(const crbkit_result* r) {
  return r ? r->result.summary.c_str() : "";
}

}  // extern "C"
