/*
 * crbkit C API.
 *
 * Every function returns a crbkit_status. On failure the thread-local
 * message from crbkit_last_error() describes what went wrong. Objects are
 * opaque handles created by *_create / *_load / computation functions and
 * released with the matching *_free; passing NULL to a *_free is a no-op.
 * Matrix data crosses the boundary in row-major order.
 */
#ifndef CRBKIT_CRBKIT_H
#define CRBKIT_CRBKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef CRBKIT_BUILDING
#    define CRBKIT_API __declspec(dllexport)
#  else
#    define CRBKIT_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) || defined(__clang__)
#  define CRBKIT_API __attribute__((visibility("default")))
#else
#  define CRBKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum crbkit_status {
  CRBKIT_OK = 0,
  CRBKIT_ERR_NULL_ARGUMENT = 1,
  CRBKIT_ERR_INVALID_MATRIX = 2,
  CRBKIT_ERR_INVALID_INPUT = 3,
  CRBKIT_ERR_INVALID_MODEL = 4,
  CRBKIT_ERR_RANK_DEFICIENT_CONSTRAINT = 5,
  CRBKIT_ERR_FULL_RANK_FIM = 6,
  CRBKIT_ERR_NOT_MINIMUM_CONSTRAINT = 7,
  CRBKIT_ERR_SINGULAR_RESTRICTION = 8,
  CRBKIT_ERR_SAMPLING_EXHAUSTED = 9,
  CRBKIT_ERR_NUMERICAL_FAILURE = 10,
  CRBKIT_ERR_DEGENERATE_PARAMETER = 11,
  CRBKIT_ERR_IO = 12,
  CRBKIT_ERR_BUFFER_TOO_SMALL = 13,
  CRBKIT_ERR_INTERNAL = 99
} crbkit_status;

typedef struct crbkit_matrix crbkit_matrix;
typedef struct crbkit_config crbkit_config;
typedef struct crbkit_result crbkit_result;

typedef struct crbkit_tolerances {
  double rank_tol_rel; /* default 1e-10 */
  double psd_tol;      /* <= 0 selects 1e-9 * sigma_max */
  double margin_tol;   /* default 1e-9 */
} crbkit_tolerances;

CRBKIT_API const char* crbkit_version(void);
CRBKIT_API const char* crbkit_last_error(void);
CRBKIT_API const char* crbkit_status_name(crbkit_status status);
CRBKIT_API crbkit_tolerances crbkit_default_tolerances(void);

/* Matrices */
CRBKIT_API crbkit_status crbkit_matrix_create(size_t rows, size_t cols, const double* data,
                                              crbkit_matrix** out);
CRBKIT_API void crbkit_matrix_free(crbkit_matrix* m);
CRBKIT_API crbkit_status crbkit_matrix_shape(const crbkit_matrix* m, size_t* rows, size_t* cols);
CRBKIT_API crbkit_status crbkit_matrix_get(const crbkit_matrix* m, size_t row, size_t col,
                                           double* value);
/* Copies rows * cols values; `len` is the capacity of `data`. */
CRBKIT_API crbkit_status crbkit_matrix_copy(const crbkit_matrix* m, double* data, size_t len);
CRBKIT_API crbkit_status crbkit_matrix_load(const char* path, crbkit_matrix** out);
CRBKIT_API crbkit_status crbkit_matrix_save(const crbkit_matrix* m, const char* path);

/* Linear algebra */
CRBKIT_API crbkit_status crbkit_rank(const crbkit_matrix* j, double rank_tol_rel, size_t* rank);
CRBKIT_API crbkit_status crbkit_pinv(const crbkit_matrix* j, double rank_tol_rel,
                                     crbkit_matrix** out);
/* Descending eigenvalues as an n x 1 matrix. */
CRBKIT_API crbkit_status crbkit_eigvals(const crbkit_matrix* j, crbkit_matrix** out);
CRBKIT_API crbkit_status crbkit_is_psd(const crbkit_matrix* m, double psd_tol, int* result);
CRBKIT_API crbkit_status crbkit_null_complement(const crbkit_matrix* f_jac, double rank_tol_rel,
                                                crbkit_matrix** out);

/* Bounds. `bound` is set to NULL when the bound does not exist. */
CRBKIT_API crbkit_status crbkit_unconstrained_crb(const crbkit_matrix* j,
                                                  const crbkit_tolerances* tol,
                                                  crbkit_matrix** bound, int* singular_fim);
CRBKIT_API crbkit_status crbkit_constrained_crb(const crbkit_matrix* j, const crbkit_matrix* f_jac,
                                                const crbkit_tolerances* tol, crbkit_matrix** bound,
                                                int* exists);

/* Constraints */
CRBKIT_API crbkit_status crbkit_optimal_constraint(const crbkit_matrix* j, const double* theta0,
                                                   size_t n, const crbkit_tolerances* tol,
                                                   crbkit_matrix** f_jac, crbkit_matrix** offset);
/* flags: bit 0 full-rank Jacobian, bit 1 U^T J U nonsingular, bit 2 rank sum n. */
CRBKIT_API crbkit_status crbkit_check_minimum_constraint(const crbkit_matrix* j,
                                                         const crbkit_matrix* f_jac,
                                                         const crbkit_tolerances* tol,
                                                         int* is_minimum, unsigned* flags);

/* Models */
CRBKIT_API crbkit_status crbkit_blind_channel_fim(const double* theta, size_t s_len, size_t h_len,
                                                  double noise_var, crbkit_matrix** out);
CRBKIT_API crbkit_status crbkit_ambiguity_direction(const double* theta, size_t s_len,
                                                    size_t h_len, double* direction);

/* Built-in counterexample: pass flag and min eigenvalue of D. */
CRBKIT_API crbkit_status crbkit_counterexample_check(const crbkit_tolerances* tol, int* passed,
                                                     double* min_eig);

/* Runs (analyze / certify / experiment) */
CRBKIT_API crbkit_status crbkit_config_create(crbkit_config** out);
CRBKIT_API void crbkit_config_free(crbkit_config* cfg);
CRBKIT_API crbkit_status crbkit_config_set(crbkit_config* cfg, const char* key, const char* value);
CRBKIT_API crbkit_status crbkit_config_load(crbkit_config* cfg, const char* path);
CRBKIT_API crbkit_status crbkit_run(const crbkit_config* cfg, crbkit_result** out);
CRBKIT_API void crbkit_result_free(crbkit_result* r);
/* 0 ok, 2 invalid input, 3 numerical failure, 4 certificate failed. */
CRBKIT_API int crbkit_result_exit_code(const crbkit_result* r);
CRBKIT_API const char* crbkit_result_summary(const crbkit_result* r);

#ifdef __cplusplus
}
#endif

#endif /* CRBKIT_CRBKIT_H */
