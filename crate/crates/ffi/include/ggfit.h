#ifndef GGFIT_H
#define GGFIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 2 to 5 agree with the command-line exit codes.
 */
typedef enum GgfitStatus {
  GGFIT_STATUS_OK = 0,
  GGFIT_STATUS_NULL_POINTER = 1,
  GGFIT_STATUS_INVALID_ARGUMENT = 2,
  GGFIT_STATUS_DUPLICATE_POINTS = 3,
  GGFIT_STATUS_LOOKUP = 4,
  GGFIT_STATUS_IO = 5,
  GGFIT_STATUS_NUMERICAL = 6,
  GGFIT_STATUS_PANIC = 7,
} GgfitStatus;

/**
 * Rejection region of the test.
 */
typedef enum GgfitTail {
  GGFIT_TAIL_LEFT = 0,
  GGFIT_TAIL_RIGHT = 1,
  GGFIT_TAIL_TWO_SIDED = 2,
} GgfitTail;

/**
 * An `n × m` sample of points.
 */
typedef struct GgfitSample GgfitSample;

/**
 * A table of simulated null critical values.
 */
typedef struct GgfitTable GgfitTable;

/**
 * Decision of one test. Absent critical values are NaN.
 */
typedef struct GgfitOutcome {
  double statistic;
  double entropy;
  double moment;
  double critical_lower;
  double critical_upper;
  bool reject;
  size_t n;
  size_t m;
  size_t k;
} GgfitOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ggfit_version(void);

/**
 * Message for the most recent failure on this thread, or NULL.
 *
 * The pointer stays valid until the next call into this library from the
 * same thread.
 */
const char *ggfit_last_error_message(void);

/**
 * Copies `n * m` row-major values into a new sample.
 *
 * # Safety
 * `data` must point to `n * m` readable doubles and `out` must be writable.
 */
enum GgfitStatus ggfit_sample_from_rows(const double *data,
                                        size_t n,
                                        size_t m,
                                        struct GgfitSample **out);

/**
 * Draws `n` points from `GG_rate(m, s)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GgfitStatus ggfit_sample_gg(size_t m,
                                 double s,
                                 double rate,
                                 size_t n,
                                 uint64_t seed,
                                 uint64_t stream,
                                 struct GgfitSample **out);

/**
 * Draws `n` points from the `m`-variate Student-t law with `nu` degrees of freedom.
 *
 * # Safety
 * `out` must be writable.
 */
enum GgfitStatus ggfit_sample_student_t(size_t m,
                                        double nu,
                                        size_t n,
                                        uint64_t seed,
                                        uint64_t stream,
                                        struct GgfitSample **out);

/**
 * Reports the number of points and the dimension.
 *
 * # Safety
 * `sample` must be a live handle; `n` and `m` must be writable.
 */
enum GgfitStatus ggfit_sample_shape(const struct GgfitSample *sample, size_t *n, size_t *m);

/**
 * Copies the row-major coordinates into `out`, which holds `len` doubles.
 *
 * # Safety
 * `sample` must be a live handle and `out` must have room for `len` doubles.
 */
enum GgfitStatus ggfit_sample_copy(const struct GgfitSample *sample, double *out, size_t len);

/**
 * Releases a sample. NULL is ignored.
 *
 * # Safety
 * `sample` must be NULL or a handle not yet freed.
 */
void ggfit_sample_free(struct GgfitSample *sample);

/**
 * k-nearest-neighbour entropy estimate in nats.
 *
 * # Safety
 * `sample` must be a live handle and `out` writable.
 */
enum GgfitStatus ggfit_knn_entropy(const struct GgfitSample *sample, size_t k, double *out);

/**
 * Goodness-of-fit statistic for shape `s`.
 *
 * # Safety
 * `sample` must be a live handle and `out` writable.
 */
enum GgfitStatus ggfit_test_statistic(const struct GgfitSample *sample,
                                      double s,
                                      size_t k,
                                      double *out);

/**
 * Simulates a critical-value table at the levels in `alphas`.
 *
 * # Safety
 * `alphas` must point to `n_alphas` readable doubles and `out` must be writable.
 */
enum GgfitStatus ggfit_table_simulate(size_t m,
                                      double s,
                                      size_t n,
                                      size_t k,
                                      const double *alphas,
                                      size_t n_alphas,
                                      size_t replicates,
                                      uint64_t seed,
                                      uint64_t stream,
                                      struct GgfitTable **out);

/**
 * Parses a table from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum GgfitStatus ggfit_table_from_json(const char *json, struct GgfitTable **out);

/**
 * Serializes a table to JSON. Release the string with [`ggfit_string_free`].
 *
 * # Safety
 * `table` must be a live handle and `out` writable.
 */
enum GgfitStatus ggfit_table_to_json(const struct GgfitTable *table, char **out);

/**
 * Releases a table. NULL is ignored.
 *
 * # Safety
 * `table` must be NULL or a handle not yet freed.
 */
void ggfit_table_free(struct GgfitTable *table);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void ggfit_string_free(char *s);

/**
 * Tests the sample against `GG(m, s)` with critical values from `table`.
 *
 * # Safety
 * `sample` and `table` must be live handles and `out` writable.
 */
enum GgfitStatus ggfit_run_test(const struct GgfitSample *sample,
                                double s,
                                size_t k,
                                double alpha,
                                const struct GgfitTable *table,
                                enum GgfitTail tail,
                                struct GgfitOutcome *out);

/**
 * Tests the sample with critical values simulated on the spot.
 *
 * # Safety
 * `sample` must be a live handle and `out` writable.
 */
enum GgfitStatus ggfit_run_test_fresh(const struct GgfitSample *sample,
                                      double s,
                                      size_t k,
                                      double alpha,
                                      size_t replicates,
                                      uint64_t seed,
                                      uint64_t stream,
                                      enum GgfitTail tail,
                                      struct GgfitOutcome *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GGFIT_H */
