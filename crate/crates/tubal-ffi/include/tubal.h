/* C interface to the tubal tensor recovery library. */

#ifndef TUBAL_H
#define TUBAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every function.
 */
typedef enum TubalStatus {
  TUBAL_STATUS_OK = 0,
  TUBAL_STATUS_NULL_ARGUMENT = 1,
  TUBAL_STATUS_INVALID_ARGUMENT = 2,
  TUBAL_STATUS_DIMENSION_MISMATCH = 3,
  TUBAL_STATUS_INDEX_OUT_OF_BOUNDS = 4,
  TUBAL_STATUS_NUMERICAL_FAILURE = 5,
  TUBAL_STATUS_IO_FAILURE = 6,
  TUBAL_STATUS_BAD_FORMAT = 7,
} TubalStatus;

/**
 * Sampling model selector for mask construction.
 */
typedef enum TubalSampling {
  TUBAL_SAMPLING_UNIFORM_WITHOUT_REPLACEMENT = 0,
  TUBAL_SAMPLING_BERNOULLI = 1,
} TubalSampling;

/**
 * Problem selector for the default regularization weight.
 */
typedef enum TubalProblem {
  TUBAL_PROBLEM_RTC = 0,
  TUBAL_PROBLEM_TRPCA = 1,
} TubalProblem;

/**
 * Opaque observation mask.
 */
typedef struct TubalMask TubalMask;

/**
 * Opaque dense third-order tensor.
 */
typedef struct TubalTensor TubalTensor;

/**
 * Solver options. `lambda <= 0` selects the theory default for the mask
 * rate; the remaining fields mirror the library defaults.
 */
typedef struct TubalSolveOptions {
  double lambda;
  double mu0;
  double mu_max;
  double growth;
  double eps;
  uintptr_t max_iters;
  /**
   * Nonzero enables the conjugate-symmetry halving (the default).
   */
  int32_t conj_symmetry;
} TubalSolveOptions;

/**
 * Convergence diagnostics of a solve.
 */
typedef struct TubalSolveReport {
  int32_t converged;
  uintptr_t iters;
  double residual_l;
  double residual_e;
  double residual_feasibility;
  double wall_seconds;
} TubalSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread. Never null.
 */
const char *tubal_last_error_message(void);

/**
 * Creates an `n1 x n2 x n3` tensor. `data` may be null for a zero tensor;
 * otherwise it must hold `n1 * n2 * n3` doubles in layout order.
 *
 * # Safety
 * `out` must be a valid pointer; `data`, when non-null, must point to at
 * least `n1 * n2 * n3` readable doubles.
 */
enum TubalStatus tubal_tensor_new(uintptr_t n1,
                                  uintptr_t n2,
                                  uintptr_t n3,
                                  const double *data,
                                  struct TubalTensor **out);

/**
 * Releases a tensor handle. Null is a no-op.
 *
 * # Safety
 * `t` must be a handle returned by this library and not yet freed.
 */
void tubal_tensor_free(struct TubalTensor *t);

/**
 * # Safety
 * All pointers must be valid; `t` must be a live handle.
 */
enum TubalStatus tubal_tensor_dims(const struct TubalTensor *t,
                                   uintptr_t *n1,
                                   uintptr_t *n2,
                                   uintptr_t *n3);

/**
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum TubalStatus tubal_tensor_get(const struct TubalTensor *t,
                                  uintptr_t i,
                                  uintptr_t j,
                                  uintptr_t k,
                                  double *out);

/**
 * # Safety
 * `t` must be a live handle.
 */
enum TubalStatus tubal_tensor_set(struct TubalTensor *t,
                                  uintptr_t i,
                                  uintptr_t j,
                                  uintptr_t k,
                                  double value);

/**
 * Copies the flat data (layout order) into `buffer`, which holds `len`
 * doubles; `len` must equal `n1 * n2 * n3`.
 *
 * # Safety
 * `buffer` must point to at least `len` writable doubles.
 */
enum TubalStatus tubal_tensor_copy_data(const struct TubalTensor *t, double *buffer, uintptr_t len);

/**
 * Reads a `.t3d` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `out` a valid pointer.
 */
enum TubalStatus tubal_tensor_read(const char *path, struct TubalTensor **out);

/**
 * Writes a `.t3d` file (atomically).
 *
 * # Safety
 * `t` must be a live handle; `path` a NUL-terminated string.
 */
enum TubalStatus tubal_tensor_write(const struct TubalTensor *t, const char *path);

/**
 * Draws an observation mask (see the library docs for the two models).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TubalStatus tubal_mask_sample(uintptr_t n1,
                                   uintptr_t n2,
                                   uintptr_t n3,
                                   double rate,
                                   enum TubalSampling model,
                                   uint64_t seed,
                                   struct TubalMask **out);

/**
 * The full mask (every entry observed).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TubalStatus tubal_mask_full(uintptr_t n1, uintptr_t n2, uintptr_t n3, struct TubalMask **out);

/**
 * Number of observed entries.
 *
 * # Safety
 * `m` must be a live handle and `out` valid.
 */
enum TubalStatus tubal_mask_len(const struct TubalMask *m, uintptr_t *out);

/**
 * Reads a text mask file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` valid.
 */
enum TubalStatus tubal_mask_read(const char *path, struct TubalMask **out);

/**
 * Writes a text mask file (atomically).
 *
 * # Safety
 * `m` must be a live handle; `path` NUL-terminated.
 */
enum TubalStatus tubal_mask_write(const struct TubalMask *m, const char *path);

/**
 * Releases a mask handle. Null is a no-op.
 *
 * # Safety
 * `m` must be a handle returned by this library and not yet freed.
 */
void tubal_mask_free(struct TubalMask *m);

/**
 * The theory-backed regularization weight for the given dims and rate.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TubalStatus tubal_default_lambda(uintptr_t n1,
                                      uintptr_t n2,
                                      uintptr_t n3,
                                      double rate,
                                      enum TubalProblem problem,
                                      double *out);

/**
 * Fills `out` with the default solver options (`lambda = 0`, meaning
 * "choose the theory default at solve time").
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TubalStatus tubal_solve_options_default(struct TubalSolveOptions *out);

/**
 * Robust tensor completion. `options` and `out_sparse` and `report` may be
 * null; `out_low_rank` receives a new handle on success.
 *
 * # Safety
 * Handles must be live; out-pointers, when non-null, must be valid.
 */
enum TubalStatus tubal_solve_rtc(const struct TubalTensor *x,
                                 const struct TubalMask *mask,
                                 const struct TubalSolveOptions *options,
                                 struct TubalTensor **out_low_rank,
                                 struct TubalTensor **out_sparse,
                                 struct TubalSolveReport *report);

/**
 * Tensor completion (no sparse term on observed entries).
 *
 * # Safety
 * As for [`tubal_solve_rtc`].
 */
enum TubalStatus tubal_solve_tc(const struct TubalTensor *x,
                                const struct TubalMask *mask,
                                const struct TubalSolveOptions *options,
                                struct TubalTensor **out_low_rank,
                                struct TubalTensor **out_sparse,
                                struct TubalSolveReport *report);

/**
 * Tensor robust PCA (fully observed). The default lambda here is the
 * TRPCA one.
 *
 * # Safety
 * As for [`tubal_solve_rtc`].
 */
enum TubalStatus tubal_solve_trpca(const struct TubalTensor *x,
                                   const struct TubalSolveOptions *options,
                                   struct TubalTensor **out_low_rank,
                                   struct TubalTensor **out_sparse,
                                   struct TubalSolveReport *report);

/**
 * Tubal rank at a relative threshold; pass a negative threshold for the
 * default (1e-8).
 *
 * # Safety
 * `t` must be a live handle and `out` valid.
 */
enum TubalStatus tubal_tensor_tubal_rank(const struct TubalTensor *t,
                                         double threshold,
                                         uintptr_t *out);

/**
 * Tubal nuclear norm.
 *
 * # Safety
 * `t` must be a live handle and `out` valid.
 */
enum TubalStatus tubal_tensor_tnn(const struct TubalTensor *t, double *out);

/**
 * Relative Frobenius error `||a - b||_F / ||b||_F`.
 *
 * # Safety
 * Both handles must be live and `out` valid.
 */
enum TubalStatus tubal_rel_error(const struct TubalTensor *a,
                                 const struct TubalTensor *b,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUBAL_H */
