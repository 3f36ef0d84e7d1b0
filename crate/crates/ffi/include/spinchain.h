#ifndef SPINCHAIN_H
#define SPINCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpinchainStatus {
  SPINCHAIN_STATUS_OK = 0,
  SPINCHAIN_STATUS_NULL_POINTER = 1,
  SPINCHAIN_STATUS_INVALID_ARGUMENT = 2,
  SPINCHAIN_STATUS_DIMENSION = 3,
  SPINCHAIN_STATUS_VALIDATION = 4,
  SPINCHAIN_STATUS_DEGENERATE_DATA = 5,
  SPINCHAIN_STATUS_CONVERGENCE = 6,
  SPINCHAIN_STATUS_DEGENERACY = 7,
  SPINCHAIN_STATUS_FORMAT = 8,
  SPINCHAIN_STATUS_CONFIG = 9,
  SPINCHAIN_STATUS_IO = 10,
  SPINCHAIN_STATUS_BUFFER_TOO_SMALL = 11,
  SPINCHAIN_STATUS_PANIC = 12,
} SpinchainStatus;

typedef struct SpinchainBasis SpinchainBasis;

typedef struct SpinchainConfig SpinchainConfig;

typedef struct SpinchainResult SpinchainResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on this thread.
 */
const char *spinchain_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *spinchain_version(void);

/**
 * Translation-invariant Pauli basis for chain length `l` and arity up to `k_max`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SpinchainStatus spinchain_basis_new(size_t l, size_t k_max, struct SpinchainBasis **out);

/**
 * Number of operators `T`.
 *
 * # Safety
 * `basis` must be a live handle or null; `out` must be writable.
 */
enum SpinchainStatus spinchain_basis_len(const struct SpinchainBasis *basis, size_t *out);

/**
 * # Safety
 * `basis` must come from [`spinchain_basis_new`] and not be used afterwards.
 */
void spinchain_basis_free(struct SpinchainBasis *basis);

/**
 * Default run configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum SpinchainStatus spinchain_config_default(struct SpinchainConfig **out);

/**
 * Configuration from TOML text; missing keys take their defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum SpinchainStatus spinchain_config_from_toml(const char *toml, struct SpinchainConfig **out);

/**
 * Writes the 64-character hex config hash plus NUL into `buf` (at least 65 bytes).
 *
 * # Safety
 * `config` must be live; `buf` must hold `len` bytes.
 */
enum SpinchainStatus spinchain_config_hash(const struct SpinchainConfig *config,
                                           char *buf,
                                           size_t len);

/**
 * # Safety
 * `config` must come from a constructor here and not be used afterwards.
 */
void spinchain_config_free(struct SpinchainConfig *config);

/**
 * Runs the sliding-window pipeline on `samples`.
 *
 * # Safety
 * Handles must be live, `samples` must hold `len` values, `out` must be writable.
 */
enum SpinchainStatus spinchain_pipeline_run(const struct SpinchainConfig *config,
                                            const struct SpinchainBasis *basis,
                                            const double *samples,
                                            size_t len,
                                            struct SpinchainResult **out);

/**
 * Number of windows, including skipped ones.
 *
 * # Safety
 * `result` must be live; `out` must be writable.
 */
enum SpinchainStatus spinchain_result_window_count(const struct SpinchainResult *result,
                                                   size_t *out);

/**
 * `UQ[ℓ]` per window (NaN for skipped windows). `written` receives the count needed.
 *
 * # Safety
 * `result` must be live; `out` must hold `capacity` values; `written` may be null.
 */
enum SpinchainStatus spinchain_result_uq(const struct SpinchainResult *result,
                                         double *out,
                                         size_t capacity,
                                         size_t *written);

/**
 * Mode distance of each window to the previous one.
 *
 * # Safety
 * As for [`spinchain_result_uq`].
 */
enum SpinchainStatus spinchain_result_distance_signal(const struct SpinchainResult *result,
                                                      double *out,
                                                      size_t capacity,
                                                      size_t *written);

/**
 * # Safety
 * `result` must come from [`spinchain_pipeline_run`] and not be used afterwards.
 */
void spinchain_result_free(struct SpinchainResult *result);

/**
 * Mean-jump series for `seed` (5000 values).
 *
 * # Safety
 * `out` must hold `capacity` values; `written` may be null.
 */
enum SpinchainStatus spinchain_gen_mean_jumps(uint64_t seed,
                                              double *out,
                                              size_t capacity,
                                              size_t *written);

/**
 * Variance-jump series for `seed` (5000 values).
 *
 * # Safety
 * As for [`spinchain_gen_mean_jumps`].
 */
enum SpinchainStatus spinchain_gen_variance_jumps(uint64_t seed,
                                                  double *out,
                                                  size_t capacity,
                                                  size_t *written);

/**
 * Silverman's rule-of-thumb bandwidth.
 *
 * # Safety
 * `samples` must hold `len` values; `out` must be writable.
 */
enum SpinchainStatus spinchain_silverman_bandwidth(const double *samples, size_t len, double *out);

/**
 * Peak-detection ROC AUC of a window-indexed score signal against sample-index truths.
 *
 * # Safety
 * `scores` and `truth` must hold their lengths; `out` must be writable.
 */
enum SpinchainStatus spinchain_roc_auc(const double *scores,
                                       size_t n_scores,
                                       const size_t *truth,
                                       size_t n_truth,
                                       size_t window,
                                       size_t stride,
                                       size_t tolerance,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINCHAIN_H */
