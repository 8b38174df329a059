/* redd — Redundancy-d (R(d)) FIFO stability toolkit: C API.
 *
 * Opaque handles + status codes over the C++ core. Every function that can
 * fail returns a redd_status; on failure redd_last_error() holds a
 * thread-local message for the failing call. Strings returned as char* are
 * heap-allocated and must be released with redd_string_free().
 *
 * Status values mirror the CLI exit-code contract.
 */

#ifndef REDD_H
#define REDD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define REDD_API __declspec(dllexport)
#else
#define REDD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum redd_status {
    REDD_OK = 0,
    REDD_ERR_ARGUMENT = 1,   /* bad call arguments / internal failure */
    REDD_ERR_CONFIG = 2,     /* invalid configuration */
    REDD_ERR_CAPABILITY = 3, /* request outside what this build can compute */
    REDD_ERR_IO = 4,         /* file system failure */
    REDD_ERR_VALIDATION = 5  /* a model validation check failed */
} redd_status;

typedef struct redd_config redd_config;
typedef struct redd_bounds redd_bounds;
typedef struct redd_trace redd_trace;
typedef struct redd_sweep redd_sweep;
typedef struct redd_validation redd_validation;

REDD_API const char* redd_version(void);

/* Message for the last failing call on this thread ("" if none). */
REDD_API const char* redd_last_error(void);

REDD_API void redd_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

REDD_API redd_status redd_config_load(const char* path, redd_config** out);
REDD_API redd_status redd_config_parse(const char* text, redd_config** out);
REDD_API void redd_config_free(redd_config* cfg);

/* canonical round-trip form */
REDD_API char* redd_config_serialize(const redd_config* cfg);

REDD_API redd_status redd_config_set_seed(redd_config* cfg, uint64_t seed);
REDD_API redd_status redd_config_set_workers(redd_config* cfg, int workers);

REDD_API int redd_config_K(const redd_config* cfg);
REDD_API int redd_config_d_count(const redd_config* cfg);
REDD_API int redd_config_d_at(const redd_config* cfg, int i);
REDD_API int redd_config_lambda_count(const redd_config* cfg);
REDD_API double redd_config_lambda_at(const redd_config* cfg, int i);
REDD_API uint64_t redd_config_seed(const redd_config* cfg);
REDD_API int redd_config_lambda_m_enabled(const redd_config* cfg);

/* ---- bounds ------------------------------------------------------------- */

/* Computes P_m, lambda_lb, the known bound 1/E[min_d B] and their max for
 * (K from cfg, d). with_lambda_m additionally runs the gap-grid search using
 * the [bounds] section settings. */
REDD_API redd_status redd_bounds_compute(const redd_config* cfg, int d, int with_lambda_m,
                                         redd_bounds** out);
REDD_API void redd_bounds_free(redd_bounds* b);

REDD_API int redd_bounds_K(const redd_bounds* b);
REDD_API int redd_bounds_d(const redd_bounds* b);
REDD_API double redd_bounds_pm(const redd_bounds* b, int m); /* 0 <= m <= d */
/* exact value as a decimal fraction string, e.g. "2/3" */
REDD_API char* redd_bounds_pm_rational(const redd_bounds* b, int m);
REDD_API double redd_bounds_lambda_lb(const redd_bounds* b);
REDD_API double redd_bounds_known_bound(const redd_bounds* b);
REDD_API double redd_bounds_best_bound(const redd_bounds* b);
REDD_API int redd_bounds_time_scaling_ok(const redd_bounds* b);
REDD_API int redd_bounds_has_lambda_m(const redd_bounds* b);
REDD_API double redd_bounds_lambda_m(const redd_bounds* b);
REDD_API double redd_bounds_lambda_m_std_error(const redd_bounds* b);
REDD_API int redd_bounds_gap_len(const redd_bounds* b);
REDD_API redd_status redd_bounds_gap(const redd_bounds* b, int64_t* buf, size_t cap);
/* structured report (JSON) */
REDD_API char* redd_bounds_json(const redd_bounds* b);

/* bounds.csv content for every d in the config (metadata line + header) */
REDD_API char* redd_bounds_csv(const redd_config* cfg);

/* ---- simulation ---------------------------------------------------------- */

/* Single run; needs scalar d and lambda in the config. */
REDD_API redd_status redd_simulate(const redd_config* cfg, redd_trace** out);
REDD_API void redd_trace_free(redd_trace* t);

REDD_API double redd_trace_mean_total_workload(const redd_trace* t);
REDD_API double redd_trace_max_total_workload(const redd_trace* t);
REDD_API uint64_t redd_trace_jobs(const redd_trace* t);
REDD_API double redd_trace_mean_sojourn(const redd_trace* t);
REDD_API const char* redd_trace_verdict(const redd_trace* t);
REDD_API char* redd_trace_json(const redd_trace* t);
/* thinned total-workload series as slot,total_workload rows */
REDD_API char* redd_trace_series_csv(const redd_trace* t);

/* ---- sweep ---------------------------------------------------------------- */

/* One run per (d, lambda) cell from the config lists; deterministic given the
 * base seed regardless of the worker count. */
REDD_API redd_status redd_sweep_run(const redd_config* cfg, redd_sweep** out);
REDD_API void redd_sweep_free(redd_sweep* s);

REDD_API int redd_sweep_rows(const redd_sweep* s);
REDD_API char* redd_sweep_csv(const redd_sweep* s);

/* ---- validation ----------------------------------------------------------- */

/* Runs the model validation battery. REDD_OK means the battery ran; query
 * redd_validation_passed for the outcome. inject_step_fault perturbs the
 * recursion so the failure path can be exercised. */
REDD_API redd_status redd_validate_run(const redd_config* cfg, int inject_step_fault,
                                       redd_validation** out);
REDD_API void redd_validation_free(redd_validation* v);

REDD_API int redd_validation_passed(const redd_validation* v);
REDD_API char* redd_validation_report(const redd_validation* v);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* REDD_H */
