#ifndef FROC_H
#define FROC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum FrocStatus {
  FROC_STATUS_OK = 0,
  FROC_STATUS_NULL_POINTER = 1,
  FROC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data failed validation or parsing.
   */
  FROC_STATUS_DATA = 3,
  /**
   * Fitting or inference failed numerically.
   */
  FROC_STATUS_NUMERICAL = 4,
  FROC_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  FROC_STATUS_PANIC = 6,
} FrocStatus;

typedef enum FrocFamily {
  FROC_FAMILY_NORMAL = 0,
  FROC_FAMILY_BETA = 1,
} FrocFamily;

typedef struct FrocDataset FrocDataset;

/**
 * Collects subjects one at a time.
 */
typedef struct FrocDatasetBuilder FrocDatasetBuilder;

typedef struct FrocFit FrocFit;

/**
 * Dataset counts.
 */
typedef struct FrocSummary {
  size_t k1;
  size_t k2;
  size_t total_lesions;
  size_t tp_marks;
  size_t fp_on_positives;
  size_t fp_on_negatives;
} FrocSummary;

/**
 * Point estimate with a two-sided `1 - alpha` interval.
 */
typedef struct FrocIndexEstimate {
  double value;
  /**
   * Named to stay clear of the `stderr` macro in `<stdio.h>`.
   */
  double std_error;
  double ci_low;
  double ci_high;
  double alpha;
} FrocIndexEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *froc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *froc_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void froc_string_free(char *s);

/**
 * Reads a dataset from a subjects CSV and a marks CSV.
 *
 * # Safety
 * Path arguments must be NUL-terminated strings; `out` must be writable.
 */
enum FrocStatus froc_dataset_from_csv(const char *subjects_path,
                                      const char *marks_path,
                                      struct FrocDataset **out);

struct FrocDatasetBuilder *froc_dataset_builder_new(void);

/**
 * Adds a positive subject with `n_lesions` lesions.
 *
 * `lesion_scores[i]` is the TP score of lesion `i`, NaN when it was missed.
 * `fp_scores` may be null when `n_fp` is 0.
 *
 * # Safety
 * Array arguments must point to at least the stated number of values.
 */
enum FrocStatus froc_dataset_builder_add_positive(struct FrocDatasetBuilder *builder,
                                                  const char *id,
                                                  const double *lesion_scores,
                                                  size_t n_lesions,
                                                  const double *fp_scores,
                                                  size_t n_fp);

/**
 * # Safety
 * `fp_scores` must point to `n_fp` values or be null when `n_fp` is 0.
 */
enum FrocStatus froc_dataset_builder_add_negative(struct FrocDatasetBuilder *builder,
                                                  const char *id,
                                                  const double *fp_scores,
                                                  size_t n_fp);

/**
 * Consumes the builder, which must not be used or freed afterwards, even
 * when this call fails.
 *
 * # Safety
 * `builder` must come from [`froc_dataset_builder_new`].
 */
enum FrocStatus froc_dataset_builder_finish(struct FrocDatasetBuilder *builder,
                                            struct FrocDataset **out);

/**
 * # Safety
 * `builder` must come from [`froc_dataset_builder_new`] and not be finished.
 */
void froc_dataset_builder_free(struct FrocDatasetBuilder *builder);

/**
 * # Safety
 * `ds` must come from this library and not have been freed.
 */
void froc_dataset_free(struct FrocDataset *ds);

/**
 * # Safety
 * `ds` must be a live dataset handle; `out` must be writable.
 */
enum FrocStatus froc_dataset_summary(const struct FrocDataset *ds, struct FrocSummary *out);

/**
 * Fits the IDCA model.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` must be writable.
 */
enum FrocStatus froc_fit(const struct FrocDataset *ds,
                         enum FrocFamily tp_family,
                         enum FrocFamily fp_family,
                         struct FrocFit **out);

/**
 * # Safety
 * `fit` must come from [`froc_fit`] and not have been freed.
 */
void froc_fit_free(struct FrocFit *fit);

/**
 * AFROC area with a delta-method interval; `logit` non-zero uses the logit scale.
 *
 * # Safety
 * `fit` must be a live fit handle; `out` must be writable.
 */
enum FrocStatus froc_fit_auc(const struct FrocFit *fit,
                             double alpha,
                             int32_t logit,
                             struct FrocIndexEstimate *out);

/**
 * LLF at FPF `q` with a delta-method interval.
 *
 * # Safety
 * `fit` must be a live fit handle; `out` must be writable.
 */
enum FrocStatus froc_fit_llf(const struct FrocFit *fit,
                             double q,
                             double alpha,
                             int32_t logit,
                             struct FrocIndexEstimate *out);

/**
 * Fitted curve at `n` FPF values. `fpf` and `llf` must each hold `n` values.
 *
 * # Safety
 * `fit` must be a live fit handle; output arrays must hold `n` values.
 */
enum FrocStatus froc_afroc_curve(const struct FrocFit *fit, size_t n, double *fpf, double *llf);

/**
 * The fit as a JSON document; release with [`froc_string_free`].
 *
 * # Safety
 * `fit` must be a live fit handle; `out` must be writable.
 */
enum FrocStatus froc_fit_to_json(const struct FrocFit *fit, char **out);

/**
 * # Safety
 * `ds` must be a live dataset handle; `out` must be writable.
 */
enum FrocStatus froc_empirical_auc(const struct FrocDataset *ds, double *out);

/**
 * Empirical AFROC area with a bootstrap interval over `b` replicates.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` must be writable.
 */
enum FrocStatus froc_bootstrap_auc(const struct FrocDataset *ds,
                                   size_t b,
                                   double alpha,
                                   uint64_t seed,
                                   struct FrocIndexEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROC_H */
