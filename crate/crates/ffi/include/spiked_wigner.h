#ifndef SPIKED_WIGNER_H
#define SPIKED_WIGNER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_UTF8 = 2,
  SW_STATUS_INVALID_ARGUMENT = 3,
  SW_STATUS_INVALID_CONFIG = 4,
  SW_STATUS_NOTHING_TO_MEASURE = 5,
  SW_STATUS_BELOW_PHASE_TRANSITION = 6,
  SW_STATUS_ON_BRANCH_CUT = 7,
  SW_STATUS_NEAR_SINGULAR_SHIFT = 8,
  SW_STATUS_NO_CONVERGENCE = 9,
  SW_STATUS_KERNEL_SINGULARITY = 10,
  SW_STATUS_IO = 11,
  SW_STATUS_OUT_OF_RANGE = 12,
  SW_STATUS_PANIC = 99,
} SwStatus;

typedef enum SwComparison {
  /**
   * `|empirical − target| ≤ tolerance`
   */
  SW_COMPARISON_WITHIN = 0,
  /**
   * `empirical < target`
   */
  SW_COMPARISON_BELOW = 1,
  /**
   * `empirical > target`
   */
  SW_COMPARISON_ABOVE = 2,
} SwComparison;

/**
 * An experiment configuration.
 */
typedef struct SwConfig SwConfig;

/**
 * A dense real symmetric or Hermitian matrix.
 */
typedef struct SwMatrix SwMatrix;

/**
 * The outcome of a run.
 */
typedef struct SwReport SwReport;

/**
 * Numeric part of one verdict; the name is read with `sw_report_verdict_name`.
 */
typedef struct SwVerdict {
  enum SwComparison comparison;
  double empirical;
  double target;
  double tolerance;
  /**
   * NaN when the tolerance did not involve a standard error.
   */
  double standard_error;
  bool passed;
} SwVerdict;

/**
 * Summary of one per-replica statistic.
 */
typedef struct SwStatistic {
  uint64_t count;
  double mean;
  double variance;
  double standard_error;
  double median;
  double min;
  double max;
} SwStatistic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *sw_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sw_last_error_message(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sw_string_free(char *s);

/**
 * Default config of an experiment (`"outliers"`, `"xi-proxy"`,
 * `"resolvent"`, `"testfn"` or `"steinitz-demo"`).
 *
 * # Safety
 * `experiment` must be a nul-terminated string; `out` must be writable.
 */
enum SwStatus sw_config_default(const char *experiment, struct SwConfig **out);

/**
 * Config from a JSON object naming its `experiment`; missing fields take
 * that experiment's defaults, unknown fields are rejected.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum SwStatus sw_config_from_json(const char *json, struct SwConfig **out);

/**
 * Replaces one top-level field; `json_value` is JSON text. The config is
 * left unchanged on error.
 *
 * # Safety
 * `cfg` must be a live config; `key` and `json_value` nul-terminated strings.
 */
enum SwStatus sw_config_set(struct SwConfig *cfg, const char *key, const char *json_value);

/**
 * Sets the worker thread count (at least 1).
 *
 * # Safety
 * `cfg` must be a live config.
 */
enum SwStatus sw_config_set_workers(struct SwConfig *cfg, size_t workers);

/**
 * Serializes the config; free the result with `sw_string_free`.
 *
 * # Safety
 * `cfg` must be a live config; `out` must be writable.
 */
enum SwStatus sw_config_to_json(const struct SwConfig *cfg, char **out);

/**
 * # Safety
 * `cfg` must be NULL or a config not yet freed.
 */
void sw_config_free(struct SwConfig *cfg);

/**
 * Runs the configured experiment.
 *
 * # Safety
 * `cfg` must be a live config; `out` must be writable.
 */
enum SwStatus sw_run(const struct SwConfig *cfg, struct SwReport **out);

/**
 * Whether every verdict passed.
 *
 * # Safety
 * `report` must be a live report; `out` must be writable.
 */
enum SwStatus sw_report_passed(const struct SwReport *report, bool *out);

/**
 * Number of replicas run and skipped.
 *
 * # Safety
 * `report` must be a live report; `replicas` and `skipped` must be writable.
 */
enum SwStatus sw_report_counts(const struct SwReport *report, size_t *replicas, size_t *skipped);

/**
 * # Safety
 * `report` must be a live report; `out` must be writable.
 */
enum SwStatus sw_report_verdict_count(const struct SwReport *report, size_t *out);

/**
 * # Safety
 * `report` must be a live report; `out` must be writable.
 */
enum SwStatus sw_report_verdict(const struct SwReport *report, size_t index, struct SwVerdict *out);

/**
 * Name of a verdict; free with `sw_string_free`.
 *
 * # Safety
 * `report` must be a live report; `out` must be writable.
 */
enum SwStatus sw_report_verdict_name(const struct SwReport *report, size_t index, char **out);

/**
 * Summary of a named per-replica statistic.
 *
 * # Safety
 * `report` must be a live report; `name` a nul-terminated string; `out` writable.
 */
enum SwStatus sw_report_statistic(const struct SwReport *report,
                                  const char *name,
                                  struct SwStatistic *out);

/**
 * The JSON report; free with `sw_string_free`.
 *
 * # Safety
 * `report` must be a live report; `out` must be writable.
 */
enum SwStatus sw_report_to_json(const struct SwReport *report, char **out);

/**
 * Writes `<stem>.json` and `<stem>.csv` into `dir`.
 *
 * # Safety
 * `report` must be a live report; `dir` and `stem` nul-terminated strings.
 */
enum SwStatus sw_report_write(const struct SwReport *report, const char *dir, const char *stem);

/**
 * # Safety
 * `report` must be NULL or a report not yet freed.
 */
void sw_report_free(struct SwReport *report);

/**
 * Samples `X_N = W_N/√N` with entry law given as JSON, e.g.
 * `{"kind":"standardized-bernoulli","p":0.2,"sigma":1.0}`; `beta` is 1 or 2.
 *
 * # Safety
 * `law_json` must be a nul-terminated string; `out` must be writable.
 */
enum SwStatus sw_matrix_sample_wigner(const char *law_json,
                                      size_t n,
                                      uint8_t beta,
                                      uint64_t seed,
                                      struct SwMatrix **out);

/**
 * `X + A` for spikes given as a JSON list, e.g. `[{"theta":2.0,"frame":"uniform"}]`.
 *
 * # Safety
 * `matrix` must be a live matrix; `spikes_json` a nul-terminated string; `out` writable.
 */
enum SwStatus sw_matrix_add_spikes(const struct SwMatrix *matrix,
                                   const char *spikes_json,
                                   struct SwMatrix **out);

/**
 * # Safety
 * `matrix` must be a live matrix; `out` must be writable.
 */
enum SwStatus sw_matrix_dim(const struct SwMatrix *matrix, size_t *out);

/**
 * Eigenvalues in ascending order into `out`, which must hold exactly `len = n` values.
 *
 * # Safety
 * `matrix` must be a live matrix; `out` must point to `len` writable doubles.
 */
enum SwStatus sw_matrix_eigenvalues(const struct SwMatrix *matrix, double *out, size_t len);

/**
 * # Safety
 * `matrix` must be NULL or a matrix not yet freed.
 */
void sw_matrix_free(struct SwMatrix *matrix);

/**
 * `ρ_θ = θ + σ²/θ` when `|θ| > σ`; otherwise `*exists` is false and `*rho` untouched.
 *
 * # Safety
 * `rho` and `exists` must be writable.
 */
enum SwStatus sw_outlier_location(double theta, double sigma, double *rho, bool *exists);

/**
 * `c_θ = θ²/(θ² − σ²)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SwStatus sw_c_theta(double theta, double sigma, double *out);

/**
 * `g_σ(z)` off the cut `[−2σ, 2σ]`.
 *
 * # Safety
 * `g_re` and `g_im` must be writable.
 */
enum SwStatus sw_stieltjes_g(double z_re, double z_im, double sigma, double *g_re, double *g_im);

/**
 * The 2×2 covariance of `(Re G(z₁), Im G(z₁))` with `(Re G(z₂), Im G(z₂))`,
 * row-major into `out[0..4]`.
 *
 * # Safety
 * `out` must point to 4 writable doubles.
 */
enum SwStatus sw_gamma_covariance(double z1_re,
                                  double z1_im,
                                  double z2_re,
                                  double z2_im,
                                  double sigma,
                                  bool same_index,
                                  uint8_t beta,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIKED_WIGNER_H */
