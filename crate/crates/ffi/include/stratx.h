#ifndef STRATX_H
#define STRATX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StratxStatus {
  STRATX_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  STRATX_STATUS_NULL_POINTER = 1,
  /**
   * Bad parameter, column index, kind name or non-UTF-8 string.
   */
  STRATX_STATUS_INVALID_ARGUMENT = 2,
  /**
   * File could not be read or written.
   */
  STRATX_STATUS_IO = 3,
  /**
   * Malformed or inconsistent input data.
   */
  STRATX_STATUS_DATA = 4,
  /**
   * Too few supported feature values to build a curve.
   */
  STRATX_STATUS_INSUFFICIENT_SUPPORT = 5,
  /**
   * Category merging did not converge.
   */
  STRATX_STATUS_MERGE_LIMIT = 6,
  /**
   * Output buffer shorter than the object.
   */
  STRATX_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * Internal failure; the library caught a panic.
   */
  STRATX_STATUS_INTERNAL = 8,
} StratxStatus;

typedef struct StratxCurve StratxCurve;

typedef struct StratxDataset StratxDataset;

typedef struct StratxEffect StratxEffect;

/**
 * Tuning parameters shared by both procedures. `min_slopes_per_x` is
 * ignored for categorical features.
 */
typedef struct StratxParams {
  size_t min_samples_leaf;
  size_t min_slopes_per_x;
  size_t ntrials;
  double max_features;
  uint64_t rng_seed;
} StratxParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *stratx_last_error(void);

struct StratxParams stratx_params_default(void);

/**
 * Loads a CSV with a header row. `categorical` lists `n_categorical`
 * column names to label-encode; it may be null when the count is 0.
 *
 * # Safety
 * Strings must be NUL-terminated; `out` must be writable.
 */
enum StratxStatus stratx_dataset_load_csv(const char *path,
                                          const char *response,
                                          const char *const *categorical,
                                          size_t n_categorical,
                                          struct StratxDataset **out);

/**
 * Builds an all-numeric dataset from `n_cols` column-major columns of
 * `n_rows` values each. `names` may be null, giving `x0, x1, ...`.
 *
 * # Safety
 * `values` must hold `n_rows * n_cols` doubles and `response` `n_rows`;
 * `names`, when given, must hold `n_cols` NUL-terminated strings.
 */
enum StratxStatus stratx_dataset_from_columns(const double *values,
                                              size_t n_rows,
                                              size_t n_cols,
                                              const double *response,
                                              const char *const *names,
                                              struct StratxDataset **out);

/**
 * Generates one of the built-in datasets: `interaction`,
 * `noisy_quadratic`, `weather` or `bodyweight`.
 *
 * # Safety
 * `kind` must be NUL-terminated; `out` must be writable.
 */
enum StratxStatus stratx_dataset_synth(const char *kind,
                                       size_t n,
                                       double sigma,
                                       uint64_t seed,
                                       struct StratxDataset **out);

/**
 * # Safety
 * `ds` must be a live handle or null.
 */
size_t stratx_dataset_n_rows(const struct StratxDataset *ds);

/**
 * # Safety
 * `ds` must be a live handle or null.
 */
size_t stratx_dataset_n_features(const struct StratxDataset *ds);

/**
 * # Safety
 * `ds` must be a live handle; `name` NUL-terminated; `out` writable.
 */
enum StratxStatus stratx_dataset_column_index(const struct StratxDataset *ds,
                                              const char *name,
                                              size_t *out);

/**
 * Writes the dataset as CSV, labels decoded and the response last.
 *
 * # Safety
 * `ds` must be a live handle; `path` NUL-terminated.
 */
enum StratxStatus stratx_dataset_write_csv(const struct StratxDataset *ds, const char *path);

/**
 * # Safety
 * `ds` must come from a `stratx_dataset_*` constructor and not be used
 * afterwards. Null is ignored.
 */
void stratx_dataset_free(struct StratxDataset *ds);

/**
 * Partial dependence curve of numeric feature `j`. `params` may be null
 * for defaults.
 *
 * # Safety
 * `ds` must be a live handle; `out` writable.
 */
enum StratxStatus stratx_stratpd(const struct StratxDataset *ds,
                                 size_t j,
                                 const struct StratxParams *params,
                                 struct StratxCurve **out);

/**
 * Number of kept points.
 *
 * # Safety
 * `c` must be a live handle or null.
 */
size_t stratx_curve_len(const struct StratxCurve *c);

/**
 * # Safety
 * `c` must be a live handle or null.
 */
size_t stratx_curve_ignored_rows(const struct StratxCurve *c);

/**
 * Copies the curve into caller buffers of length `cap`; any buffer may be
 * null to skip it.
 *
 * # Safety
 * `c` must be a live handle; non-null buffers must hold `cap` elements.
 */
enum StratxStatus stratx_curve_copy(const struct StratxCurve *c,
                                    double *x,
                                    double *pd_y,
                                    size_t *counts,
                                    size_t cap);

/**
 * Writes `x,pd_y,count` CSV.
 *
 * # Safety
 * `c` must be a live handle; `path` NUL-terminated.
 */
enum StratxStatus stratx_curve_write_csv(const struct StratxCurve *c, const char *path);

/**
 * # Safety
 * `c` must come from [`stratx_stratpd`] and not be used afterwards.
 */
void stratx_curve_free(struct StratxCurve *c);

/**
 * Per-category effect of categorical feature `j`. `params` may be null
 * for defaults.
 *
 * # Safety
 * `ds` must be a live handle; `out` writable.
 */
enum StratxStatus stratx_catstratpd(const struct StratxDataset *ds,
                                    size_t j,
                                    const struct StratxParams *params,
                                    struct StratxEffect **out);

/**
 * Number of categories.
 *
 * # Safety
 * `e` must be a live handle or null.
 */
size_t stratx_effect_len(const struct StratxEffect *e);

/**
 * # Safety
 * `e` must be a live handle or null.
 */
size_t stratx_effect_ignored_rows(const struct StratxEffect *e);

/**
 * Copies deltas (NaN for unsupported categories) and counts into caller
 * buffers of length `cap`; either may be null.
 *
 * # Safety
 * `e` must be a live handle; non-null buffers must hold `cap` elements.
 */
enum StratxStatus stratx_effect_copy(const struct StratxEffect *e,
                                     double *delta,
                                     size_t *counts,
                                     size_t cap);

/**
 * Label of category `k`, valid while the handle lives, or null when `k`
 * is out of range.
 *
 * # Safety
 * `e` must be a live handle or null.
 */
const char *stratx_effect_label(const struct StratxEffect *e, size_t k);

/**
 * Writes `category_label,delta,count` CSV.
 *
 * # Safety
 * `e` must be a live handle; `path` NUL-terminated.
 */
enum StratxStatus stratx_effect_write_csv(const struct StratxEffect *e, const char *path);

/**
 * # Safety
 * `e` must come from [`stratx_catstratpd`] and not be used afterwards.
 */
void stratx_effect_free(struct StratxEffect *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATX_H */
