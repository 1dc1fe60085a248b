/* Exercises the C API through the shared library only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "crbkit/crbkit.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static double at(const crbkit_matrix* m, size_t i, size_t k) {
  double v = NAN;
  crbkit_matrix_get(m, i, k, &v);
  return v;
}

static void test_basics(void) {
  EXPECT(strcmp(crbkit_version(), "1.0.0") == 0);
  EXPECT(strcmp(crbkit_status_name(CRBKIT_ERR_FULL_RANK_FIM), "full-rank FIM") == 0);
  crbkit_tolerances t = crbkit_default_tolerances();
  EXPECT(t.rank_tol_rel == 1e-10);
  EXPECT(t.margin_tol == 1e-9);

  crbkit_matrix* m = NULL;
  const double bad[] = {1.0, NAN, 0.0, 1.0};
  EXPECT(crbkit_matrix_create(2, 2, bad, &m) == CRBKIT_OK); /* raw storage accepts NaN */
  size_t rank = 0;
  EXPECT(crbkit_rank(m, 1e-10, &rank) == CRBKIT_ERR_INVALID_MATRIX);
  EXPECT(strlen(crbkit_last_error()) > 0);
  crbkit_matrix_free(m);

  EXPECT(crbkit_rank(NULL, 1e-10, &rank) == CRBKIT_ERR_NULL_ARGUMENT);
  crbkit_matrix_free(NULL);
  crbkit_config_free(NULL);
  crbkit_result_free(NULL);
}

static void test_diag20(void) {
  const double d[] = {2.0, 0.0, 0.0, 0.0};
  crbkit_matrix* j = NULL;
  EXPECT(crbkit_matrix_create(2, 2, d, &j) == CRBKIT_OK);

  size_t rank = 0;
  EXPECT(crbkit_rank(j, 1e-10, &rank) == CRBKIT_OK && rank == 1);

  crbkit_matrix* p = NULL;
  EXPECT(crbkit_pinv(j, 1e-10, &p) == CRBKIT_OK);
  EXPECT(fabs(at(p, 0, 0) - 0.5) < 1e-15 && at(p, 1, 1) == 0.0);

  double buf[4];
  EXPECT(crbkit_matrix_copy(p, buf, 3) == CRBKIT_ERR_BUFFER_TOO_SMALL);
  EXPECT(crbkit_matrix_copy(p, buf, 4) == CRBKIT_OK && fabs(buf[0] - 0.5) < 1e-15);
  crbkit_matrix_free(p);

  crbkit_matrix* ev = NULL;
  EXPECT(crbkit_eigvals(j, &ev) == CRBKIT_OK);
  size_t r = 0, c = 0;
  crbkit_matrix_shape(ev, &r, &c);
  EXPECT(r == 2 && c == 1);
  EXPECT(fabs(at(ev, 0, 0) - 2.0) < 1e-15);
  crbkit_matrix_free(ev);

  const double theta[] = {3.0, 4.0};
  crbkit_matrix* f = NULL;
  crbkit_matrix* off = NULL;
  EXPECT(crbkit_optimal_constraint(j, theta, 2, NULL, &f, &off) == CRBKIT_OK);
  EXPECT(fabs(fabs(at(f, 0, 1)) - 1.0) < 1e-15);
  EXPECT(fabs(at(f, 0, 1) * 4.0 + at(off, 0, 0)) < 1e-14);

  int is_min = 0;
  unsigned flags = 0;
  EXPECT(crbkit_check_minimum_constraint(j, f, NULL, &is_min, &flags) == CRBKIT_OK);
  EXPECT(is_min == 1 && flags == 7u);

  crbkit_matrix* bound = NULL;
  int exists = 0;
  EXPECT(crbkit_constrained_crb(j, f, NULL, &bound, &exists) == CRBKIT_OK && exists);
  EXPECT(fabs(at(bound, 0, 0) - 0.5) < 1e-14);
  crbkit_matrix_free(bound);

  const double along_range[] = {1.0, 0.0};
  crbkit_matrix* g = NULL;
  crbkit_matrix_create(1, 2, along_range, &g);
  EXPECT(crbkit_constrained_crb(j, g, NULL, &bound, &exists) == CRBKIT_OK);
  EXPECT(!exists && bound == NULL);
  EXPECT(crbkit_check_minimum_constraint(j, g, NULL, &is_min, &flags) == CRBKIT_OK);
  EXPECT(is_min == 0 && (flags & 2u) == 0);
  crbkit_matrix_free(g);

  crbkit_matrix_free(f);
  crbkit_matrix_free(off);
  crbkit_matrix_free(j);

  const double id[] = {1.0, 0.0, 0.0, 1.0};
  crbkit_matrix* full = NULL;
  crbkit_matrix_create(2, 2, id, &full);
  f = off = NULL;
  EXPECT(crbkit_optimal_constraint(full, theta, 2, NULL, &f, &off) == CRBKIT_ERR_FULL_RANK_FIM);
  EXPECT(f == NULL && off == NULL);
  crbkit_matrix_free(full);
}

static void test_models_and_certificates(void) {
  const double theta[] = {0.9, 1.2, 1.1, 0.7, 1.3, 0.8};
  crbkit_matrix* j = NULL;
  EXPECT(crbkit_blind_channel_fim(theta, 3, 3, 1.0, &j) == CRBKIT_OK);
  size_t rank = 0;
  EXPECT(crbkit_rank(j, 1e-10, &rank) == CRBKIT_OK && rank == 5);
  double dir[6];
  EXPECT(crbkit_ambiguity_direction(theta, 3, 3, dir) == CRBKIT_OK);
  double jd = 0.0, jn = 0.0;
  for (size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (size_t k = 0; k < 6; ++k) {
      s += at(j, i, k) * dir[k];
      jn += at(j, i, k) * at(j, i, k);
    }
    jd += s * s;
  }
  EXPECT(sqrt(jd) <= 1e-8 * sqrt(jn));
  crbkit_matrix_free(j);
  EXPECT(crbkit_blind_channel_fim(theta, 3, 3, -1.0, &j) == CRBKIT_ERR_INVALID_MODEL);

  int passed = 0;
  double min_eig = 0.0;
  EXPECT(crbkit_counterexample_check(NULL, &passed, &min_eig) == CRBKIT_OK);
  EXPECT(passed == 1);
  EXPECT(fabs(min_eig - (1.0 - sqrt(5.0)) / 2.0) < 1e-6);
}

static void test_run(const char* out_dir) {
  crbkit_config* cfg = NULL;
  EXPECT(crbkit_config_create(&cfg) == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "command", "analyze") == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "model", "blind_channel") == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "s_len", "2") == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "h_len", "2") == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "out", out_dir) == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "no_such_key", "1") == CRBKIT_ERR_INVALID_INPUT);

  crbkit_result* res = NULL;
  EXPECT(crbkit_run(cfg, &res) == CRBKIT_OK);
  EXPECT(crbkit_result_exit_code(res) == 0);
  EXPECT(strstr(crbkit_result_summary(res), "nullity 1") != NULL);
  crbkit_result_free(res);

  EXPECT(crbkit_config_set(cfg, "command", "experiment") == CRBKIT_OK);
  EXPECT(crbkit_config_set(cfg, "count", "50") == CRBKIT_OK);
  EXPECT(crbkit_run(cfg, &res) == CRBKIT_OK);
  EXPECT(crbkit_result_exit_code(res) == 0);
  crbkit_result_free(res);

  EXPECT(crbkit_config_set(cfg, "model", "nonsense") == CRBKIT_OK);
  EXPECT(crbkit_run(cfg, &res) == CRBKIT_OK);
  EXPECT(crbkit_result_exit_code(res) == 2);
  crbkit_result_free(res);
  crbkit_config_free(cfg);
}

int main(int argc, char** argv) {
  test_basics();
  test_diag20();
  test_models_and_certificates();
  test_run(argc > 1 ? argv[1] : "capi-out");
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return EXIT_FAILURE;
  }
  printf("C API checks passed\n");
  return EXIT_SUCCESS;
}
