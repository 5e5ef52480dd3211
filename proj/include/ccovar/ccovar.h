/*
 * ccovar C API.
 *
 * Every function returns a ccovar_status; results come back through out
 * parameters. On failure, ccovar_last_error() describes the problem for the
 * calling thread until the next API call on that thread. Strings returned
 * through char** out parameters are owned by the caller and must be released
 * with ccovar_string_free. Handles are released with their *_free function;
 * passing NULL to a *_free function is a no-op.
 */
#ifndef CCOVAR_H
#define CCOVAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CCOVAR_BUILDING)
#    define CCOVAR_API __declspec(dllexport)
#  else
#    define CCOVAR_API __declspec(dllimport)
#  endif
#else
#  define CCOVAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ccovar_status {
    CCOVAR_OK = 0,
    CCOVAR_FILE_MISSING = 1,
    CCOVAR_PARSE_ERROR = 2,
    CCOVAR_NON_POSITIVE_PRICE = 3,
    CCOVAR_DUPLICATE_DATE = 4,
    CCOVAR_TOO_SHORT = 5,
    CCOVAR_EMPTY_INTERSECTION = 6,
    CCOVAR_EMPTY_SUB_PERIOD = 7,
    CCOVAR_DEGENERATE_SERIES = 8,
    CCOVAR_DF_NON_POSITIVE = 9,
    CCOVAR_INVALID_PARAMS = 10,
    CCOVAR_PROBABILITY_OUT_OF_RANGE = 11,
    CCOVAR_ARGUMENT_OUT_OF_RANGE = 12,
    CCOVAR_OPTIMIZER_FAILED = 13,
    CCOVAR_ALL_FITS_FAILED = 14,
    CCOVAR_ROOT_NOT_BRACKETED = 15,
    CCOVAR_LENGTH_MISMATCH = 16,
    CCOVAR_MANIFEST_INCOMPLETE = 17,
    CCOVAR_CONFIG_ERROR = 18,
    CCOVAR_IO_ERROR = 19,
    CCOVAR_NULL_ARGUMENT = 20,
    CCOVAR_INTERNAL = 99
} ccovar_status;

typedef enum ccovar_direction {
    CCOVAR_DOWN = 0,
    CCOVAR_UP = 1
} ccovar_direction;

/* One-sided K-S alternatives: GREATER measures sup(F_g - F_h), i.e. evidence
 * that the first sample is stochastically smaller; LESS the reverse. */
typedef enum ccovar_ks_direction {
    CCOVAR_KS_LESS = 0,
    CCOVAR_KS_GREATER = 1
} ccovar_ks_direction;

typedef struct ccovar_config ccovar_config;
typedef struct ccovar_copula ccovar_copula;

/* ---- general ----------------------------------------------------------- */

CCOVAR_API const char* ccovar_version(void);
/* Symbolic name such as "too_short"; "unknown" for unrecognized values. */
CCOVAR_API const char* ccovar_status_name(int status);
/* Message of the last failed call on this thread ("" if none). */
CCOVAR_API const char* ccovar_last_error(void);
/* 1-based CSV line (header = 1) of the last ingestion error, 0 if not applicable. */
CCOVAR_API size_t ccovar_last_error_row(void);
CCOVAR_API void ccovar_string_free(char* text);
/* Progress messages on stderr (0 = off). */
CCOVAR_API void ccovar_set_verbose(int verbose);

/* ---- configuration and pipeline ---------------------------------------- */

CCOVAR_API ccovar_status ccovar_config_default(ccovar_config** out);
CCOVAR_API ccovar_status ccovar_config_load(const char* path, ccovar_config** out);
/* Relative paths given here resolve against the current directory. */
CCOVAR_API ccovar_status ccovar_config_set(ccovar_config* config, const char* key, const char* value);
/* CCOVAR_SEED / CCOVAR_OUT environment overrides. */
CCOVAR_API ccovar_status ccovar_config_apply_env(ccovar_config* config);
/* Current value of a key as it would be rendered, e.g. "out" or "seed". */
CCOVAR_API ccovar_status ccovar_config_get(const ccovar_config* config, const char* key, char** value);
CCOVAR_API ccovar_status ccovar_config_render(const ccovar_config* config, char** text);
CCOVAR_API void ccovar_config_free(ccovar_config* config);

/* Runs one stage; *paths receives the written files, one per line. */
CCOVAR_API ccovar_status ccovar_run_stage(const ccovar_config* config, const char* stage, char** paths);
/* Runs every stage; *manifest_path receives the path of manifest.json. */
CCOVAR_API ccovar_status ccovar_run_pipeline(const ccovar_config* config, char** manifest_path);
/* Writes a synthetic data set; *paths receives the written files, one per line. */
CCOVAR_API ccovar_status ccovar_simulate(const ccovar_config* config, char** paths);
/* Renders the tables of a completed run directory. */
CCOVAR_API ccovar_status ccovar_report(const char* out_dir, char** text);

/* ---- skewed Student-t (Hansen) ----------------------------------------- */

CCOVAR_API ccovar_status ccovar_skewt_pdf(double z, double nu, double eta, double* out);
CCOVAR_API ccovar_status ccovar_skewt_cdf(double z, double nu, double eta, double* out);
CCOVAR_API ccovar_status ccovar_skewt_quantile(double p, double nu, double eta, double* out);

/* ---- copulas ------------------------------------------------------------ */

/*
 * label: "Normal", "StudentT", "Clayton", "SurvClayton", "Gumbel",
 * "SurvGumbel", or a mixture "Upper+Lower" such as "Gumbel+SurvGumbel".
 * params: rho | rho, nu | alpha | theta_upper, theta_lower, weight_upper.
 */
CCOVAR_API ccovar_status ccovar_copula_create(const char* label, const double* params, size_t n_params,
                                              ccovar_copula** out);
/* Maximum-likelihood fit of the labelled candidate to n pseudo-observations. */
CCOVAR_API ccovar_status ccovar_copula_fit(const char* label, const double* u1, const double* u2, size_t n,
                                           ccovar_copula** out, double* loglik, double* aic);
/* Minimum-AIC choice among the default candidates. */
CCOVAR_API ccovar_status ccovar_copula_select(const double* u1, const double* u2, size_t n, ccovar_copula** out);
CCOVAR_API void ccovar_copula_free(ccovar_copula* copula);

/* *label receives e.g. "Gumbel+SurvGumbel". */
CCOVAR_API ccovar_status ccovar_copula_label(const ccovar_copula* copula, char** label);
/* Natural parameters in the order accepted by ccovar_copula_create. */
CCOVAR_API ccovar_status ccovar_copula_params(const ccovar_copula* copula, double* params, size_t capacity,
                                              size_t* count);
CCOVAR_API ccovar_status ccovar_copula_cdf(const ccovar_copula* copula, double u1, double u2, double* out);
CCOVAR_API ccovar_status ccovar_copula_pdf(const ccovar_copula* copula, double u1, double u2, double* out);
/* Pr(U1 <= u1 | U2 = u2). */
CCOVAR_API ccovar_status ccovar_copula_hfunc(const ccovar_copula* copula, double u1, double u2, double* out);
CCOVAR_API ccovar_status ccovar_copula_tail(const ccovar_copula* copula, double* lower, double* upper);
CCOVAR_API ccovar_status ccovar_copula_kendall_tau(const ccovar_copula* copula, double* out);
/* Writes n pairs into caller-provided arrays. */
CCOVAR_API ccovar_status ccovar_copula_sample(const ccovar_copula* copula, size_t n, uint64_t seed, double* u1,
                                              double* u2);

/* ---- risk --------------------------------------------------------------- */

/* Conditional quantile level v of the spot return for a futures tail event
 * at level alpha (the extreme state); alpha is the lower tail for DOWN and
 * the upper tail for UP (e.g. 0.05 and 0.95). */
CCOVAR_API ccovar_status ccovar_covar_level(const ccovar_copula* copula, double alpha, ccovar_direction direction,
                                            double* out);
/* Level for the median futures state: Pr(U2 <= v | U1 = 0.5) = alpha. */
CCOVAR_API ccovar_status ccovar_median_state_level(const ccovar_copula* copula, double alpha, double* out);

/* ---- spillover tests ---------------------------------------------------- */

CCOVAR_API ccovar_status ccovar_ks_statistic(const double* g, size_t m, const double* h, size_t n,
                                             ccovar_ks_direction direction, double* out);
CCOVAR_API ccovar_status ccovar_ks_pvalue(const double* g, size_t m, const double* h, size_t n,
                                          ccovar_ks_direction direction, int n_bootstrap, uint64_t seed,
                                          double* out);

#ifdef __cplusplus
}
#endif

#endif /* CCOVAR_H */
