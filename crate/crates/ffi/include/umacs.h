#ifndef UMACS_H
#define UMACS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define UMACS_ALGORITHM_OMP 0

#define UMACS_ALGORITHM_GOMP 1

#define UMACS_ALGORITHM_COSAMP 2

#define UMACS_ALGORITHM_SP 3

typedef enum UmacsStatus {
  UMACS_STATUS_OK = 0,
  UMACS_STATUS_NULL_POINTER = 1,
  UMACS_STATUS_INVALID_PARAMETER = 2,
  UMACS_STATUS_INFEASIBLE = 3,
  UMACS_STATUS_DIMENSION = 4,
  UMACS_STATUS_UNDEFINED_STATISTIC = 5,
  UMACS_STATUS_BUFFER_TOO_SMALL = 6,
  UMACS_STATUS_INTERNAL = 7,
  UMACS_STATUS_PANIC = 8,
} UmacsStatus;

/**
 * Opaque sensing matrix.
 */
typedef struct UmacsMatrix UmacsMatrix;

/**
 * Opaque decoder result.
 */
typedef struct UmacsRecovery UmacsRecovery;

/**
 * Pooled detection-probability estimate with its 95% score interval.
 */
typedef struct UmacsPdEstimate {
  double estimate;
  double lower;
  double upper;
  uint64_t detected;
  uint64_t messages;
  size_t trials_run;
} UmacsPdEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *umacs_last_error_message(void);

/**
 * Linear `Eb/N0` of a phase split with CS power `p1` and energy ratio `alpha`.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UmacsStatus umacs_eb_n0(double p1, size_t np, double alpha, uint32_t b, double *out);

/**
 * Linear CS power spending an `Eb/N0` budget given in dB, less `backoff_db`.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UmacsStatus umacs_p1_from_budget(double ebn0_db,
                                      size_t np,
                                      double alpha,
                                      uint32_t b,
                                      double backoff_db,
                                      double *out);

/**
 * Builds an `np x 2^bp` sensing matrix with column energy `np * p1`.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UmacsStatus umacs_matrix_new(uint32_t bp,
                                  size_t np,
                                  double p1,
                                  uint64_t seed,
                                  struct UmacsMatrix **out);

/**
 * # Safety
 * `matrix` must be null or a handle from [`umacs_matrix_new`] not yet freed.
 */
void umacs_matrix_free(struct UmacsMatrix *matrix);

/**
 * # Safety
 * `matrix` must be a live handle; `rows` and `columns` null or writable.
 */
enum UmacsStatus umacs_matrix_shape(const struct UmacsMatrix *matrix,
                                    size_t *rows,
                                    size_t *columns);

/**
 * Copies column `j` into `out[0..rows]`.
 *
 * # Safety
 * `matrix` must be a live handle; `out` valid for `len` writes.
 */
enum UmacsStatus umacs_matrix_column(const struct UmacsMatrix *matrix,
                                     size_t j,
                                     double *out,
                                     size_t len);

/**
 * Noiseless superposition of the columns listed in `support` (repeats
 * allowed) written to `out[0..rows]`.
 *
 * # Safety
 * `matrix` must be a live handle; `support` valid for `count` reads and
 * `out` for `len` writes.
 */
enum UmacsStatus umacs_transmit(const struct UmacsMatrix *matrix,
                                const size_t *support,
                                size_t count,
                                double *out,
                                size_t len);

/**
 * Adds unit-variance Gaussian noise drawn from `seed` to `signal`, in place.
 *
 * # Safety
 * `signal` must be valid for `len` reads and writes.
 */
enum UmacsStatus umacs_add_noise(double *signal, size_t len, uint64_t seed);

/**
 * Decodes `y` with a known-sparsity decoder. `epsilon < 0` selects the
 * default residual stopping threshold.
 *
 * # Safety
 * `matrix` must be a live handle, `y` valid for `len` reads and `out`
 * null or valid for one write.
 */
enum UmacsStatus umacs_recover(const struct UmacsMatrix *matrix,
                               const double *y,
                               size_t len,
                               uint32_t algorithm_code,
                               size_t k,
                               size_t gomp_l,
                               double epsilon,
                               struct UmacsRecovery **out);

/**
 * # Safety
 * `result` must be null or a handle from [`umacs_recover`] not yet freed.
 */
void umacs_recovery_free(struct UmacsRecovery *result);

/**
 * Number of declared indices.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum UmacsStatus umacs_recovery_support_len(const struct UmacsRecovery *result, size_t *out);

/**
 * Copies the declared indices, ascending, into `out`.
 *
 * # Safety
 * `result` must be a live handle and `out` valid for `len` writes.
 */
enum UmacsStatus umacs_recovery_support(const struct UmacsRecovery *result,
                                        size_t *out,
                                        size_t len);

/**
 * Final residual norm and iteration count.
 *
 * # Safety
 * `result` must be a live handle; the outputs writable.
 */
enum UmacsStatus umacs_recovery_summary(const struct UmacsRecovery *result,
                                        double *residual_norm,
                                        size_t *iterations);

/**
 * Monte Carlo detection probability over `trials` trials from `seed`.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UmacsStatus umacs_estimate_pd(uint32_t b,
                                   uint32_t bp,
                                   size_t nt,
                                   size_t np,
                                   size_t ka,
                                   double p1,
                                   uint32_t algorithm_code,
                                   double excess,
                                   size_t gomp_l,
                                   size_t trials,
                                   uint64_t seed,
                                   struct UmacsPdEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UMACS_H */
