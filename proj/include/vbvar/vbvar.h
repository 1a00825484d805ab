/* C interface to the vbvar Bayesian VAR library.
 *
 * All objects are opaque handles created by a vbvar_*_create/load/build call
 * and released with the matching *_free function. Functions that can fail
 * return a vbvar_status; on failure vbvar_last_error() describes the problem
 * (per thread, valid until the next failing call on that thread).
 *
 * Matrices crossing the boundary are column-major unless stated otherwise.
 */
#ifndef VBVAR_VBVAR_H
#define VBVAR_VBVAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(VBVAR_BUILDING_LIBRARY)
#    define VBVAR_API __declspec(dllexport)
#  else
#    define VBVAR_API __declspec(dllimport)
#  endif
#else
#  define VBVAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vbvar_status {
  VBVAR_OK = 0,
  VBVAR_ERR_INVALID_ARGUMENT = 1,
  VBVAR_ERR_DIMENSION_MISMATCH = 2,
  VBVAR_ERR_NOT_POSITIVE_DEFINITE = 3,
  VBVAR_ERR_DOMAIN = 4,
  VBVAR_ERR_UNDEFINED_MOMENT = 5,
  VBVAR_ERR_PARSE = 6,
  VBVAR_ERR_MISSING_VALUE = 7,
  VBVAR_ERR_EMPTY_DATA = 8,
  VBVAR_ERR_INSUFFICIENT_OBSERVATIONS = 9,
  VBVAR_ERR_SINGULAR_SYSTEM = 10,
  VBVAR_ERR_NOT_CONVERGED = 11,
  VBVAR_ERR_TOO_FEW_DRAWS = 12,
  VBVAR_ERR_IO = 13,
  VBVAR_ERR_INTERNAL = 100
} vbvar_status;

typedef struct vbvar_series vbvar_series;
typedef struct vbvar_design vbvar_design;
typedef struct vbvar_report vbvar_report;
typedef struct vbvar_conjugate_fit vbvar_conjugate_fit;
typedef struct vbvar_independent_fit vbvar_independent_fit;

VBVAR_API const char* vbvar_version(void);
VBVAR_API const char* vbvar_last_error(void);
VBVAR_API const char* vbvar_status_string(vbvar_status status);

/* ---- configuration ---------------------------------------------------- */

typedef struct vbvar_minnesota_config {
  double lambda1;      /* overall tightness, > 0 */
  double lambda2;      /* cross-variable tightness, (0, 1] */
  double lambda3;      /* lag decay, >= 0 */
  double lambda4;      /* intercept scale relative to lambda1, > 0 */
  double own_lag_mean; /* prior mean of the first own lag */
  int dof_offset;      /* prior dof = M + dof_offset, >= 1 */
} vbvar_minnesota_config;

typedef struct vbvar_gibbs_config {
  int n_draws;
  int burn_in;
  uint64_t seed;
} vbvar_gibbs_config;

typedef struct vbvar_vb_config {
  int max_iters;
  double elbo_rel_tol;
  int printed_elbo_constant; /* nonzero: leading ELBO constant p/2 instead of Mp/2 */
} vbvar_vb_config;

typedef struct vbvar_simulation_config {
  int M;
  int lags;
  int T_raw;
  int burn_in;
  double own_lag;
  double cross_sd;
  double intercept_sd;
  double noise_scale;
} vbvar_simulation_config;

VBVAR_API void vbvar_minnesota_default(vbvar_minnesota_config* cfg);
VBVAR_API void vbvar_gibbs_default(vbvar_gibbs_config* cfg);
VBVAR_API void vbvar_vb_default(vbvar_vb_config* cfg);
VBVAR_API void vbvar_simulation_default(vbvar_simulation_config* cfg);

/* ---- data ------------------------------------------------------------- */

VBVAR_API vbvar_status vbvar_series_load_csv(const char* path, int has_timestamps, vbvar_series** out);
/* values are row-major, rows = time. names may be NULL. */
VBVAR_API vbvar_status vbvar_series_from_array(const double* values, size_t rows, size_t cols,
                                               const char* const* names, vbvar_series** out);
VBVAR_API vbvar_status vbvar_series_simulate(const vbvar_simulation_config* cfg, uint64_t seed, vbvar_series** out);
VBVAR_API vbvar_status vbvar_series_shape(const vbvar_series* series, size_t* rows, size_t* cols);
VBVAR_API vbvar_status vbvar_series_write_csv(const vbvar_series* series, const char* path);
VBVAR_API void vbvar_series_free(vbvar_series* series);

VBVAR_API vbvar_status vbvar_design_build(const vbvar_series* series, int lags, vbvar_design** out);
VBVAR_API vbvar_status vbvar_design_shape(const vbvar_design* design, size_t* T, size_t* M, size_t* p);
VBVAR_API void vbvar_design_free(vbvar_design* design);

/* ---- data-free diagnostics -------------------------------------------- */

VBVAR_API vbvar_status vbvar_kl_exact(int M, int p, int T, double prior_dof, double* out);
VBVAR_API vbvar_status vbvar_kl_stirling(int M, int p, int T, double prior_dof, double* out);

/* ---- reports ---------------------------------------------------------- */

VBVAR_API vbvar_status vbvar_report_conjugate(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                              vbvar_report** out);
/* gibbs may be NULL for a VB-only report. */
VBVAR_API vbvar_status vbvar_report_independent(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                                const vbvar_gibbs_config* gibbs, const vbvar_vb_config* vb,
                                                vbvar_report** out);
VBVAR_API vbvar_status vbvar_report_compare(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                            const vbvar_gibbs_config* gibbs, const vbvar_vb_config* vb,
                                            vbvar_report** out);

/* Strings are owned by the report and live until vbvar_report_free. */
VBVAR_API const char* vbvar_report_json(const vbvar_report* report);
VBVAR_API const char* vbvar_report_text(const vbvar_report* report);
VBVAR_API int vbvar_report_converged(const vbvar_report* report);
VBVAR_API vbvar_status vbvar_report_write_json(const vbvar_report* report, const char* path);
VBVAR_API vbvar_status vbvar_report_write_draws_csv(const vbvar_report* report, const char* path);
VBVAR_API vbvar_status vbvar_report_write_elbo_trace_csv(const vbvar_report* report, const char* path);
VBVAR_API void vbvar_report_free(vbvar_report* report);

/* ---- fitted models ---------------------------------------------------- */

VBVAR_API vbvar_status vbvar_conjugate_fit_create(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                                  vbvar_conjugate_fit** out);
VBVAR_API vbvar_status vbvar_conjugate_fit_log_ml(const vbvar_conjugate_fit* fit, double* out);
VBVAR_API vbvar_status vbvar_conjugate_fit_elbo(const vbvar_conjugate_fit* fit, double* out);
/* p x M posterior mean of the coefficient matrix; len must equal p * M. */
VBVAR_API vbvar_status vbvar_conjugate_fit_coefficients(const vbvar_conjugate_fit* fit, double* out, size_t len);
/* mean has M entries, the variances M * M. Any output may be NULL. */
VBVAR_API vbvar_status vbvar_conjugate_fit_predictive(const vbvar_conjugate_fit* fit, double* mean,
                                                      double* variance_exact, double* variance_vb, size_t M);
VBVAR_API void vbvar_conjugate_fit_free(vbvar_conjugate_fit* fit);

VBVAR_API vbvar_status vbvar_independent_fit_create(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                                    const vbvar_vb_config* vb, vbvar_independent_fit** out);
VBVAR_API vbvar_status vbvar_independent_fit_elbo(const vbvar_independent_fit* fit, double* out);
VBVAR_API vbvar_status vbvar_independent_fit_iterations(const vbvar_independent_fit* fit, int* iterations,
                                                        int* converged);
VBVAR_API vbvar_status vbvar_independent_fit_coefficients(const vbvar_independent_fit* fit, double* out,
                                                          size_t len);
VBVAR_API vbvar_status vbvar_independent_fit_expected_precision(const vbvar_independent_fit* fit, double* out,
                                                                size_t len);
VBVAR_API void vbvar_independent_fit_free(vbvar_independent_fit* fit);

#ifdef __cplusplus
}
#endif

#endif /* VBVAR_VBVAR_H */
