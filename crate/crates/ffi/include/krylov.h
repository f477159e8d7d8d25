#ifndef KRYLOV_H
#define KRYLOV_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  KRYLOV_STATUS_OK = 0,
  KRYLOV_STATUS_NULL_POINTER = 1,
  KRYLOV_STATUS_INVALID_ARGUMENT = 2,
  KRYLOV_STATUS_DIMENSION_MISMATCH = 3,
  KRYLOV_STATUS_IO = 4,
  KRYLOV_STATUS_PARSE = 5,
  /**
   * `bᵀc = 0`: the biorthogonal process cannot start.
   */
  KRYLOV_STATUS_INIT_BREAKDOWN = 6,
  KRYLOV_STATUS_UNSUPPORTED = 7,
  /**
   * A user callback returned nonzero.
   */
  KRYLOV_STATUS_CALLBACK_FAILED = 8,
  KRYLOV_STATUS_PANIC = 9,
} KrylovStatus;

/**
 * How one side of a solve ended.
 */
typedef enum {
  /**
   * The method does not solve this side.
   */
  KRYLOV_OUTCOME_ABSENT = 0,
  KRYLOV_OUTCOME_CONVERGED = 1,
  KRYLOV_OUTCOME_BREAKDOWN = 2,
  KRYLOV_OUTCOME_STAGNATION = 3,
  KRYLOV_OUTCOME_MAX_ITERATIONS = 4,
} KrylovOutcome;

typedef enum {
  KRYLOV_METHOD_BILQ = 0,
  KRYLOV_METHOD_BICG = 1,
  KRYLOV_METHOD_QMR = 2,
  KRYLOV_METHOD_USYMLQ = 3,
  KRYLOV_METHOD_USYMQR = 4,
  KRYLOV_METHOD_BILQR = 5,
  KRYLOV_METHOD_TRILQR = 6,
  KRYLOV_METHOD_MINRES_AUG = 7,
} KrylovMethod;

typedef enum {
  KRYLOV_PRECISION_SINGLE = 0,
  KRYLOV_PRECISION_DOUBLE = 1,
  KRYLOV_PRECISION_QUAD = 2,
} KrylovPrecision;

typedef enum {
  /**
   * `A x = b`.
   */
  KRYLOV_SIDE_PRIMAL = 0,
  /**
   * `Aᵀ t = c`.
   */
  KRYLOV_SIDE_DUAL = 1,
} KrylovSide;

/**
 * Opaque linear operator.
 */
typedef struct KrylovOperator KrylovOperator;

/**
 * Opaque solve result.
 */
typedef struct KrylovResult KrylovResult;

typedef struct {
  double atol;
  double rtol;
  size_t max_iterations;
  /**
   * A `KrylovPrecision` value.
   */
  int32_t precision;
  /**
   * Report the BiCG (or CG-like) point whenever it exists.
   */
  bool transfer;
  /**
   * Test explicit residuals every iteration.
   */
  bool explicit_residuals;
  /**
   * Left Jacobi scaling; assembled operators only.
   */
  bool jacobi;
} KrylovOptions;

/**
 * `y = A x` (or `y = Aᵀ x`) for vectors of length `n`. Returns 0 on success.
 */
typedef int32_t (*KrylovApplyFn)(void *user_data, const double *x, double *y, size_t n);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *krylov_version(void);

/**
 * Whether `KRYLOV_PRECISION_QUAD` solves are available in this build.
 */
bool krylov_quad_available(void);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *krylov_last_error_message(void);

/**
 * Defaults: `atol = 1e-10`, `rtol = 1e-7`, 10000 iterations, binary64.
 */
KrylovOptions krylov_options_default(void);

/**
 * Copies a CSR matrix (`row_ptr` has `nrows + 1` entries, `col_idx` and
 * `values` have `row_ptr[nrows]`).
 *
 * # Safety
 * The arrays must be valid for the lengths above; `out` must be writable.
 */
KrylovStatus krylov_operator_from_csr(size_t nrows,
                                      size_t ncols,
                                      const size_t *row_ptr,
                                      const size_t *col_idx,
                                      const double *values,
                                      KrylovOperator **out);

/**
 * Reads a Matrix Market coordinate file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
KrylovStatus krylov_operator_from_matrix_market(const char *path, KrylovOperator **out);

/**
 * Wraps user callbacks for `y = A x` and `y = Aᵀ x` on vectors of length `n`.
 * `user_data` is passed through untouched and must outlive the operator.
 *
 * # Safety
 * `out` must be writable; the callbacks must be safe to call with
 * `user_data` and buffers of length `n` from the thread that solves.
 */
KrylovStatus krylov_operator_from_callbacks(size_t n,
                                            KrylovApplyFn forward,
                                            KrylovApplyFn adjoint,
                                            void *user_data,
                                            KrylovOperator **out);

/**
 * Number of rows and columns; writes through whichever pointer is non-null.
 *
 * # Safety
 * `op` must be a live operator handle.
 */
KrylovStatus krylov_operator_shape(const KrylovOperator *op, size_t *nrows, size_t *ncols);

/**
 * # Safety
 * `op` must be null or a handle not yet freed.
 */
void krylov_operator_free(KrylovOperator *op);

/**
 * Solves with `method` (a `KrylovMethod`). `b` and `c` have length `n`.
 * `c` is the dual right-hand side of the adjoint-pair methods and USYMQR and
 * is ignored by the others; when null, `b` is used. `options` may be null for the
 * defaults. Solver outcomes such as breakdown are reported through
 * [`krylov_result_outcome`], not the return value.
 *
 * # Safety
 * `op` must be live; `b` (and `c` when non-null) valid for `n` reads; `out`
 * writable.
 */
KrylovStatus krylov_solve(const KrylovOperator *op,
                          int32_t method,
                          const double *b,
                          const double *c,
                          size_t n,
                          const KrylovOptions *options,
                          KrylovResult **out);

/**
 * # Safety
 * `res` must be a live result handle.
 */
size_t krylov_result_iterations(const KrylovResult *res);

/**
 * Outcome of `side` (a `KrylovSide`); `KRYLOV_OUTCOME_ABSENT` when the
 * method does not solve it.
 *
 * # Safety
 * `res` must be a live result handle.
 */
KrylovOutcome krylov_result_outcome(const KrylovResult *res, int32_t side);

/**
 * Explicit residual norm of the returned solution of `side`.
 *
 * # Safety
 * `res` must be live and `value` writable.
 */
KrylovStatus krylov_result_final_residual(const KrylovResult *res, int32_t side, double *value);

/**
 * Number of recorded iterations for `side` (0 when absent).
 *
 * # Safety
 * `res` must be a live result handle.
 */
size_t krylov_result_history_length(const KrylovResult *res, int32_t side);

/**
 * Copies the residual norm tested at each iteration of `side` into `buf`,
 * which must hold [`krylov_result_history_length`] values.
 *
 * # Safety
 * `res` must be live and `buf` valid for `len` writes.
 */
KrylovStatus krylov_result_copy_history(const KrylovResult *res,
                                        int32_t side,
                                        double *buf,
                                        size_t len);

/**
 * Copies `x` (primal) or `t` (dual) into `buf` of length `len`.
 *
 * # Safety
 * `res` must be live and `buf` valid for `len` writes.
 */
KrylovStatus krylov_result_copy_solution(const KrylovResult *res,
                                         int32_t side,
                                         double *buf,
                                         size_t len);

/**
 * # Safety
 * `res` must be null or a handle not yet freed.
 */
void krylov_result_free(KrylovResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KRYLOV_H */
