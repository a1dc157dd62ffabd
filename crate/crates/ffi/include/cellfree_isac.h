#ifndef CELLFREE_ISAC_H
#define CELLFREE_ISAC_H

/* Generated by cbindgen from the cellfree-isac-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum CfiStatus {
  CFI_STATUS_OK = 0,
  CFI_STATUS_NULL_POINTER = 1,
  CFI_STATUS_INVALID_ARGUMENT = 2,
  CFI_STATUS_CONFIG = 3,
  CFI_STATUS_DOMAIN = 4,
  CFI_STATUS_IO = 5,
  CFI_STATUS_INTERNAL = 6,
  CFI_STATUS_PANIC = 7,
} CfiStatus;

/**
 * Metric selector for sample queries.
 */
typedef enum CfiMetric {
  CFI_METRIC_RATE_BPS = 0,
  CFI_METRIC_SENSING_SNR_DB = 1,
  CFI_METRIC_STATISTIC = 2,
  CFI_METRIC_DECISION = 3,
} CfiMetric;

/**
 * Opaque experiment configuration.
 */
typedef struct CfiConfig CfiConfig;

/**
 * Opaque result of one experiment arm.
 */
typedef struct CfiResult CfiResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the library;
 * valid until the next failing call on the same thread.
 */
const char *cfi_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cfi_version(void);

/**
 * New configuration holding the baseline defaults. Free with [`cfi_config_free`].
 */
struct CfiConfig *cfi_config_default(void);

/**
 * Load a `key = value` configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CfiStatus cfi_config_load(const char *path, struct CfiConfig **out);

/**
 * Override one configuration field.
 *
 * # Safety
 * `cfg` must come from this library; `key` and `value` must be NUL-terminated.
 */
enum CfiStatus cfi_config_set(struct CfiConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must come from this library.
 */
enum CfiStatus cfi_config_validate(const struct CfiConfig *cfg);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards. Null is ignored.
 */
void cfi_config_free(struct CfiConfig *cfg);

/**
 * Detection threshold for a cluster of total dictionary rank `rank`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CfiStatus cfi_calibrate_threshold(size_t rank, double noise_var, double pfa, double *out);

/**
 * Run every drop of the configured experiment. Free the result with [`cfi_result_free`].
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum CfiStatus cfi_run_experiment(const struct CfiConfig *cfg, struct CfiResult **out);

/**
 * Number of samples of one metric.
 *
 * # Safety
 * `res` must come from this library; `out` must be writable.
 */
enum CfiStatus cfi_result_sample_count(const struct CfiResult *res,
                                       enum CfiMetric metric,
                                       size_t *out);

/**
 * Copy up to `len` samples of one metric into `buf`, in run order; `written`
 * receives the number copied.
 *
 * # Safety
 * `buf` must hold `len` doubles; `written` must be writable.
 */
enum CfiStatus cfi_result_samples(const struct CfiResult *res,
                                  enum CfiMetric metric,
                                  double *buf,
                                  size_t len,
                                  size_t *written);

/**
 * Median of one metric (NaN when there are no samples).
 *
 * # Safety
 * `res` must come from this library; `out` must be writable.
 */
enum CfiStatus cfi_result_median(const struct CfiResult *res, enum CfiMetric metric, double *out);

/**
 * Detection and false-alarm rates; NaN marks an undefined rate.
 *
 * # Safety
 * `res` must come from this library; `pd` and `pfa` must be writable.
 */
enum CfiStatus cfi_result_detection_rates(const struct CfiResult *res, double *pd, double *pfa);

/**
 * Write the result directory (config echo, CSV files, summary).
 *
 * # Safety
 * `res` must come from this library; `dir` must be NUL-terminated.
 */
enum CfiStatus cfi_result_write(const struct CfiResult *res, const char *dir);

/**
 * # Safety
 * `res` must come from this library and not be used afterwards. Null is ignored.
 */
void cfi_result_free(struct CfiResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CELLFREE_ISAC_H */
