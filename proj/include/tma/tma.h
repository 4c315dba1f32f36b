#ifndef TMA_TMA_H
#define TMA_TMA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TMA_API __declspec(dllexport)
#else
#define TMA_API __attribute__((visibility("default")))
#endif

/* Status codes. Every function returning int returns one of these. */
enum {
  TMA_OK = 0,
  TMA_ERR_INVALID_ARGUMENT = 1,
  TMA_ERR_NONFINITE_VALUE = 2,
  TMA_ERR_EMPTY_DOMAIN = 3,
  TMA_ERR_MALFORMED_FILE = 4,
  TMA_ERR_DEGENERATE_INPUT = 5,
  TMA_ERR_NO_CONVERGENCE = 6,
  TMA_ERR_INFEASIBLE_BOUNDARY = 7,
  TMA_ERR_ALPHA_OUT_OF_RANGE = 8,
  TMA_ERR_SECTION_NOT_COMPACT = 9,
  TMA_ERR_DEGENERATE_POLYGON = 10,
  TMA_ERR_DIVIDE_BY_ZERO_MASS = 11,
  TMA_ERR_DOMAIN_TOO_SMALL = 12,
  TMA_ERR_CONFIG_INVALID = 13,
  TMA_ERR_IO = 14,
  TMA_ERR_INTERNAL = 15
};

enum { TMA_DOMAIN_SQUARE = 0, TMA_DOMAIN_DISK = 1, TMA_DOMAIN_POLYGON = 2 };

enum {
  TMA_SOURCE_QUADRATIC = 0,     /* |x|^2 / 2 */
  TMA_SOURCE_ORACLE_PRIMAL = 1, /* radial primal translator */
  TMA_SOURCE_ORACLE_DUAL = 2,   /* radial dual translator */
  TMA_SOURCE_SEPARABLE = 3      /* separable solution of the degenerate model, a = 1 */
};

enum { TMA_GAMMA_INSIDE = 0, TMA_GAMMA_BAND = 1, TMA_GAMMA_OUTSIDE = 2 };

typedef struct tma_domain {
  int kind;
  double size;              /* half-width or radius */
  const double* vertices;   /* polygon: x0 y0 x1 y1 ..., counterclockwise */
  size_t n_vertices;
} tma_domain;

typedef struct tma_grid tma_grid;     /* sampled function on lattice nodes */
typedef struct tma_pl tma_pl;         /* piecewise-linear convex function */
typedef struct tma_report tma_report; /* finished experiment */

/* Message of the last failure on this thread; empty after success. */
TMA_API const char* tma_last_error_message(void);
TMA_API const char* tma_status_name(int status);
TMA_API const char* tma_version(void);
/* Frees strings returned through char** out-parameters. */
TMA_API void tma_string_free(char* s);

/* Radial and separable reference solutions. */
TMA_API int tma_radial_primal_slope(double alpha, double r, double* out);
TMA_API int tma_radial_primal_value(double alpha, double r, double* out);
TMA_API int tma_radial_dual_slope(double alpha, double r, double eta, double* out);
TMA_API int tma_radial_dual_value(double alpha, double r, double eta, double* out);
TMA_API int tma_separable_value(double alpha, double a, double x1, double x2, double* out);

/* Grid functions. */
TMA_API int tma_grid_sample(const tma_domain* domain, double h, int source, double alpha, double eta,
                            tma_grid** out);
/* values in lattice node order; n must equal the node count */
TMA_API int tma_grid_from_values(const tma_domain* domain, double h, const double* values, size_t n,
                                 tma_grid** out);
TMA_API int tma_grid_load(const char* path, tma_grid** out);
TMA_API int tma_grid_save(const tma_grid* grid, const char* path);
TMA_API size_t tma_grid_size(const tma_grid* grid);
TMA_API double tma_grid_spacing(const tma_grid* grid);
/* xy receives 2 * size doubles, values receives size doubles; either may be NULL */
TMA_API int tma_grid_data(const tma_grid* grid, double* xy, double* values);
TMA_API void tma_grid_free(tma_grid* grid);

/* Discrete Legendre transform on the default dual square. */
TMA_API int tma_legendre(const tma_grid* u, double h_dual, int brute_force, tma_grid** dual);
TMA_API int tma_biconjugate(const tma_grid* u, double h_dual, tma_grid** out);

/* Lower convex envelope of lifted sites. */
TMA_API int tma_pl_create(const double* xy, const double* heights, size_t n, tma_pl** out);
TMA_API size_t tma_pl_size(const tma_pl* f);
/* per-site Monge-Ampere masses (0 on hull and hidden sites) */
TMA_API int tma_pl_masses(const tma_pl* f, double* masses);
TMA_API int tma_pl_cells_csv(const tma_pl* f, char** csv);
TMA_API void tma_pl_free(tma_pl* f);

/* Maximum-area inscribed ellipse {c + B u : |u| <= 1} of the hull of n points. */
TMA_API int tma_john_ellipsoid(const double* xy, size_t n, double center[2], double B[4], double A[4]);

TMA_API int tma_dt_matrix(double t, double alpha, double out[4]);
TMA_API int tma_gamma_membership(double x1, double x2, double alpha, double theta, int* region);
TMA_API int tma_growth_exponent(int source, double alpha, double rmin, double rmax, int n_circles,
                                double* slope, double* ratio_proxy);

/* Experiments. Configurations are JSON text. */
/* violations: JSON array of strings, empty iff the config is accepted */
TMA_API int tma_validate_config(const char* config_json, char** violations);
TMA_API int tma_run_experiment(const char* config_json, tma_report** out);
TMA_API int tma_report_json(const tma_report* r, char** json);
/* one "PASS name measured=... expected=... tol=..." line per verdict */
TMA_API int tma_report_summary(const tma_report* r, char** text);
TMA_API int tma_report_exit_code(const tma_report* r);
TMA_API void tma_report_free(tma_report* r);

#ifdef __cplusplus
}
#endif

#endif
