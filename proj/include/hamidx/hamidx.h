#ifndef HAMIDX_HAMIDX_H
#define HAMIDX_HAMIDX_H

/*
 * C interface to the hamidx library: Maslov-type indices, mean indices,
 * rotation numbers and Fredholm checks for linear Hamiltonian systems
 * z' = J B(t) z.
 *
 * Every call returns a hamidx_status. On failure the thread-local last error
 * holds a message and a one-line JSON diagnostic. Reports and documents are
 * returned as heap strings owned by the caller and released with
 * hamidx_string_free. Options are JSON objects; unknown keys are rejected.
 */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HAMIDX_API __declspec(dllexport)
#else
#define HAMIDX_API __attribute__((visibility("default")))
#endif

typedef enum hamidx_status {
  HAMIDX_OK = 0,
  HAMIDX_E_INVALID_ARGUMENT = 1,
  HAMIDX_E_CONFIG = 2,
  HAMIDX_E_CATALOG_MISS = 3,
  HAMIDX_E_STRUCTURE_MISMATCH = 4,
  HAMIDX_E_PROPAGATION = 5,
  HAMIDX_E_NUMERICAL_INTEGRITY = 6,
  HAMIDX_E_PRECISION = 7,
  HAMIDX_E_INDEX_UNSTABLE = 8,
  HAMIDX_E_INTERNAL_CONSISTENCY = 9,
  HAMIDX_E_RANGE = 10,
  HAMIDX_E_DOMAIN = 11,
  HAMIDX_E_EQUIVALENCE_VIOLATION = 12,
  HAMIDX_E_INSUFFICIENT_HORIZON = 13,
  HAMIDX_E_PRECONDITION = 14,
  HAMIDX_E_IO = 15,
  HAMIDX_E_LIFT_FAILURE = 16,
  HAMIDX_E_UNKNOWN = 99
} hamidx_status;

/* Opaque immutable coefficient field B(t). */
typedef struct hamidx_system hamidx_system;

HAMIDX_API const char* hamidx_version(void);
HAMIDX_API const char* hamidx_status_name(hamidx_status status);

/* Message of the last failed call on this thread ("" if none). */
HAMIDX_API const char* hamidx_last_error(void);
/* {"error": name, "code": n, "message": ..., ...} on one line. */
HAMIDX_API const char* hamidx_last_error_json(void);

HAMIDX_API void hamidx_string_free(char* text);

/* JSON array of catalog names. */
HAMIDX_API hamidx_status hamidx_catalog_names(char** out_json);

/* params_json: object of numeric catalog parameters, or NULL. */
HAMIDX_API hamidx_status hamidx_system_from_catalog(const char* name, const char* params_json, hamidx_system** out);
HAMIDX_API hamidx_status hamidx_system_from_json(const char* text, hamidx_system** out);
HAMIDX_API hamidx_status hamidx_system_from_file(const char* path, hamidx_system** out);
HAMIDX_API void hamidx_system_free(hamidx_system* system);

HAMIDX_API int hamidx_system_dim_half(const hamidx_system* system);
HAMIDX_API double hamidx_system_bound(const hamidx_system* system);
/* Row-major 2d x 2d values of B(t) into out (capacity at least 4 d^2). */
HAMIDX_API hamidx_status hamidx_system_evaluate(const hamidx_system* system, double t, double* out, int capacity);
/* Canonical system document; fails for fields without a term representation. */
HAMIDX_API hamidx_status hamidx_system_to_json(const hamidx_system* system, char** out_json);

/*
 * Computations. Each writes a JSON report that embeds the effective options.
 *
 * index:      t0, t1, omega_re, omega_im, anchor (row-major array), force_epsilon, crossings_csv
 * mean_index: scheme ("direct" | "dyadic"), direction ("forward" | "backward" | "both"),
 *             horizon, k, n, theta_samples, threads, trace_csv
 * rotation:   horizon, z0 ([x, y]), trace_csv
 * sweep:      lambda_max, steps, theta_samples, horizon, threads, trace_csv
 * fredholm:   sweep options plus tol_lo, tol_hi, dichotomy, dichotomy_samples, seed
 */
HAMIDX_API hamidx_status hamidx_index(const hamidx_system* system, const char* options_json, char** out_report);
HAMIDX_API hamidx_status hamidx_mean_index(const hamidx_system* system, const char* options_json,
                                           char** out_report);
HAMIDX_API hamidx_status hamidx_rotation(const hamidx_system* system, const char* options_json, char** out_report);
HAMIDX_API hamidx_status hamidx_sweep(const hamidx_system* system, const char* options_json, char** out_report);
HAMIDX_API hamidx_status hamidx_fredholm(const hamidx_system* system, const char* options_json, char** out_report);

/* Calibration and invariant suites; HAMIDX_OK only if every check passes. The
 * report is written in either case. options: seed. */
HAMIDX_API hamidx_status hamidx_selftest(const char* options_json, char** out_report);

#ifdef __cplusplus
}
#endif

#endif
