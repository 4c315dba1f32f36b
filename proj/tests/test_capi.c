/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tma/tma.h"

static int failures = 0;

#define CHECK(cond)                                                \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: CHECK(%s)\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

#define CHECK_STATUS(expr, want)                                                     \
  do {                                                                               \
    int st_ = (expr);                                                                \
    if (st_ != (want)) {                                                             \
      fprintf(stderr, "%s:%d: %s returned %s (%s), wanted %s\n", __FILE__, __LINE__, \
              #expr, tma_status_name(st_), tma_last_error_message(), tma_status_name(want)); \
      ++failures;                                                                    \
    }                                                                                \
  } while (0)

static void test_errors(void) {
  double v = 0.0;
  CHECK(strlen(tma_version()) > 0);
  CHECK(strcmp(tma_status_name(TMA_OK), tma_status_name(TMA_ERR_IO)) != 0);
  CHECK_STATUS(tma_radial_primal_value(0.3, 1.0, &v), TMA_ERR_ALPHA_OUT_OF_RANGE);
  CHECK(strlen(tma_last_error_message()) > 0);
  CHECK_STATUS(tma_radial_primal_value(0.125, 1.0, &v), TMA_OK);
  CHECK(strlen(tma_last_error_message()) == 0);
  CHECK_STATUS(tma_radial_primal_value(0.125, 1.0, NULL), TMA_ERR_INVALID_ARGUMENT);
  CHECK_STATUS(tma_radial_dual_value(0.125, 1.0, 2.0, &v), TMA_ERR_INVALID_ARGUMENT);
  CHECK_STATUS(tma_grid_load("/nonexistent/grid.csv", NULL), TMA_ERR_INVALID_ARGUMENT);
  {
    tma_grid* g = NULL;
    int st = tma_grid_load("/nonexistent/grid.csv", &g);
    CHECK(st == TMA_ERR_IO || st == TMA_ERR_MALFORMED_FILE);
    CHECK(g == NULL);
  }
  /* Free functions accept NULL. */
  tma_grid_free(NULL);
  tma_pl_free(NULL);
  tma_report_free(NULL);
  tma_string_free(NULL);
}

static void test_oracle(void) {
  double p = 0.0, d = 0.0, s = 0.0;
  CHECK_STATUS(tma_radial_primal_value(0.125, 0.0, &p), TMA_OK);
  CHECK(fabs(p) < 1e-14);
  CHECK_STATUS(tma_radial_dual_value(0.125, 0.0, 1.0, &d), TMA_OK);
  CHECK(fabs(d) < 1e-14);
  CHECK_STATUS(tma_radial_primal_slope(0.125, 2.0, &s), TMA_OK);
  CHECK(s > 0.0);
  CHECK_STATUS(tma_separable_value(0.125, 1.0, 1.0, 1.0, &s), TMA_OK);
  CHECK(isfinite(s) && s > 0.0);
}

static void test_grid_and_legendre(void) {
  tma_domain sq = {TMA_DOMAIN_SQUARE, 1.0, NULL, 0};
  tma_grid *g = NULL, *dual = NULL, *brute = NULL, *bic = NULL, *back = NULL;
  size_t n, i;
  double *xy, *vals, *dv, *bv;
  const char* path = "tma_capi_grid.csv";

  CHECK_STATUS(tma_grid_sample(&sq, 0.125, TMA_SOURCE_QUADRATIC, 0.125, 1.0, &g), TMA_OK);
  if (!g) return;
  n = tma_grid_size(g);
  CHECK(n == 17 * 17);
  CHECK(tma_grid_spacing(g) == 0.125);
  xy = malloc(2 * n * sizeof(double));
  vals = malloc(n * sizeof(double));
  CHECK_STATUS(tma_grid_data(g, xy, vals), TMA_OK);
  for (i = 0; i < n; ++i) CHECK(fabs(vals[i] - 0.5 * (xy[2 * i] * xy[2 * i] + xy[2 * i + 1] * xy[2 * i + 1])) < 1e-15);

  /* The quadratic is self-dual; fast and brute-force transforms agree exactly. */
  CHECK_STATUS(tma_legendre(g, 0.125, 0, &dual), TMA_OK);
  CHECK_STATUS(tma_legendre(g, 0.125, 1, &brute), TMA_OK);
  if (dual && brute) {
    size_t m = tma_grid_size(dual);
    CHECK(m == tma_grid_size(brute));
    dv = malloc(m * sizeof(double));
    bv = malloc(m * sizeof(double));
    tma_grid_data(dual, NULL, dv);
    tma_grid_data(brute, NULL, bv);
    for (i = 0; i < m; ++i) CHECK(dv[i] == bv[i]);
    free(dv);
    free(bv);
  }

  /* A convex function is its own biconjugate at the nodes. */
  CHECK_STATUS(tma_biconjugate(g, 0.0625, &bic), TMA_OK);
  if (bic) {
    double* b = malloc(n * sizeof(double));
    tma_grid_data(bic, NULL, b);
    for (i = 0; i < n; ++i) CHECK(b[i] <= vals[i] && vals[i] - b[i] < 1e-12);
    free(b);
  }

  CHECK_STATUS(tma_grid_save(g, path), TMA_OK);
  CHECK_STATUS(tma_grid_load(path, &back), TMA_OK);
  if (back) {
    double* b = malloc(n * sizeof(double));
    CHECK(tma_grid_size(back) == n);
    tma_grid_data(back, NULL, b);
    for (i = 0; i < n; ++i) CHECK(b[i] == vals[i]);
    free(b);
  }
  remove(path);

  CHECK_STATUS(tma_grid_from_values(&sq, 0.125, vals, n - 1, &back), TMA_ERR_INVALID_ARGUMENT);
  vals[3] = NAN;
  {
    tma_grid* bad = NULL;
    CHECK_STATUS(tma_grid_from_values(&sq, 0.125, vals, n, &bad), TMA_ERR_NONFINITE_VALUE);
    CHECK(bad == NULL);
  }

  free(xy);
  free(vals);
  tma_grid_free(g);
  tma_grid_free(dual);
  tma_grid_free(brute);
  tma_grid_free(bic);
  tma_grid_free(back);
}

static void test_envelope(void) {
  /* Pyramid: four corners at height 1 and the centre at 0. */
  const double xy[] = {-1, -1, 1, -1, 1, 1, -1, 1, 0, 0};
  const double ht[] = {1, 1, 1, 1, 0};
  const double line[] = {0, 0, 1, 1, 2, 2};
  tma_pl* f = NULL;
  double m[5];
  char* csv = NULL;
  CHECK_STATUS(tma_pl_create(xy, ht, 5, &f), TMA_OK);
  if (!f) return;
  CHECK(tma_pl_size(f) == 5);
  CHECK_STATUS(tma_pl_masses(f, m), TMA_OK);
  CHECK(fabs(m[4] - 4.0) < 1e-12 || fabs(m[4] - 2.0) < 1e-12);
  CHECK(m[0] == 0.0 && m[1] == 0.0);
  CHECK_STATUS(tma_pl_cells_csv(f, &csv), TMA_OK);
  CHECK(csv && csv[0] == '#');
  tma_string_free(csv);
  tma_pl_free(f);
  f = NULL;
  CHECK_STATUS(tma_pl_create(line, ht, 3, &f), TMA_ERR_DEGENERATE_INPUT);
  CHECK(f == NULL);
}

static void test_geometry(void) {
  const double rect[] = {-2, -1, 2, -1, 2, 1, -2, 1};
  const double flat[] = {0, 0, 1, 1, 2, 2};
  double c[2], B[4], A[4], D[4];
  int region = -1;
  CHECK_STATUS(tma_john_ellipsoid(rect, 4, c, B, A), TMA_OK);
  CHECK(fabs(c[0]) < 1e-9 && fabs(c[1]) < 1e-9);
  CHECK(fabs(fabs(B[0] * B[3] - B[1] * B[2]) - 2.0) < 1e-6);
  CHECK(fabs(A[0] * A[3] - A[1] * A[2] - 1.0) < 1e-9);
  CHECK_STATUS(tma_john_ellipsoid(flat, 3, c, B, A), TMA_ERR_DEGENERATE_POLYGON);

  CHECK_STATUS(tma_dt_matrix(16.0, 0.125, D), TMA_OK);
  /* diag(t^(alpha/(1-2 alpha)), t^(1/2)) */
  CHECK(fabs(D[0] - pow(16.0, 1.0 / 6.0)) < 1e-12 && fabs(D[3] - 4.0) < 1e-12);
  CHECK(D[1] == 0.0 && D[2] == 0.0);
  CHECK_STATUS(tma_gamma_membership(0.0, 0.0, 0.125, 0.1, &region), TMA_OK);
  CHECK(region == TMA_GAMMA_INSIDE || region == TMA_GAMMA_BAND || region == TMA_GAMMA_OUTSIDE);
}

static void test_growth(void) {
  double slope = 0.0, ratio = 0.0;
  CHECK_STATUS(tma_growth_exponent(TMA_SOURCE_ORACLE_DUAL, 0.125, 16, 256, 5, &slope, &ratio), TMA_OK);
  CHECK(fabs(slope - 4.0) < 0.08);
  CHECK_STATUS(tma_growth_exponent(TMA_SOURCE_QUADRATIC, 0.125, 16, 256, 3, &slope, &ratio),
               TMA_ERR_INVALID_ARGUMENT);
}

static void test_experiments(void) {
  char* v = NULL;
  char* text = NULL;
  tma_report* r = NULL;
  CHECK_STATUS(tma_validate_config("{\"experiment\": \"oracle\"}", &v), TMA_OK);
  CHECK(v && strcmp(v, "[]") == 0);
  tma_string_free(v);
  v = NULL;
  CHECK_STATUS(tma_validate_config("{\"experiment\": \"oracle\", \"alpha\": 0.25}", &v), TMA_OK);
  CHECK(v && strstr(v, "alpha must be < 0.25"));
  tma_string_free(v);
  v = NULL;
  CHECK_STATUS(tma_validate_config("{\"experiment\": \"doubling\"}", &v), TMA_OK);
  CHECK(v && strstr(v, "/seed"));
  tma_string_free(v);

  CHECK_STATUS(tma_run_experiment("{\"experiment\": \"oracle\", \"alpha\": 1}", &r), TMA_ERR_CONFIG_INVALID);
  CHECK(r == NULL);
  CHECK_STATUS(tma_run_experiment("{not json", &r), TMA_ERR_CONFIG_INVALID);

  CHECK_STATUS(tma_run_experiment("{\"experiment\": \"oracle\", \"output_dir\": \"tma_capi_out\"}", &r), TMA_OK);
  if (!r) return;
  CHECK(tma_report_exit_code(r) == 0);
  CHECK_STATUS(tma_report_json(r, &text), TMA_OK);
  CHECK(text && strstr(text, "\"verdicts\""));
  tma_string_free(text);
  text = NULL;
  CHECK_STATUS(tma_report_summary(r, &text), TMA_OK);
  CHECK(text && strncmp(text, "PASS ", 5) == 0);
  tma_string_free(text);
  tma_report_free(r);
}

int main(void) {
  test_errors();
  test_oracle();
  test_grid_and_legendre();
  test_envelope();
  test_geometry();
  test_growth();
  test_experiments();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("all C API checks passed\n");
  return 0;
}
