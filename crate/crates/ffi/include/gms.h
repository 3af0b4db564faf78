#ifndef GMS_H
#define GMS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GmsStatus {
  GMS_STATUS_OK = 0,
  GMS_STATUS_NULL_POINTER = 1,
  GMS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The data or the solver failed numerically (rank deficiency,
   * divergence, degenerate spectra).
   */
  GMS_STATUS_NUMERICAL = 3,
  /**
   * The caller's buffer is too small.
   */
  GMS_STATUS_BUFFER_TOO_SMALL = 4,
  GMS_STATUS_PANIC = 5,
} GmsStatus;

/**
 * Data points, one per row.
 */
typedef struct GmsPoints GmsPoints;

/**
 * Outcome of a recovery call.
 */
typedef struct GmsResult GmsResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next `gms_*` call on the same thread.
 */
const char *gms_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *gms_version(void);

/**
 * Copies an `n × dim` row-major array into a new point set.
 *
 * # Safety
 * `data` must point to `n * dim` doubles and `out` to writable storage.
 */
enum GmsStatus gms_points_new(const double *data, size_t n, size_t dim, struct GmsPoints **out);

/**
 * # Safety
 * `points` must come from this library or be null.
 */
void gms_points_free(struct GmsPoints *points);

/**
 * # Safety
 * `points` must be a live handle; `n` and `dim` may be null.
 */
enum GmsStatus gms_points_shape(const struct GmsPoints *points, size_t *n, size_t *dim);

/**
 * Samples the haystack model: `n1` Gaussian inliers on a random
 * `d`-subspace of ℝ^dim and `n0` outliers uniform on the unit cube, with
 * Gaussian noise of size `eta` on the inliers. When `basis_out` is not
 * null the `dim × d` basis of the subspace is written to it row-major.
 *
 * # Safety
 * `out` must be writable; `basis_out` must hold `basis_len` doubles.
 */
enum GmsStatus gms_haystack(size_t n1,
                            size_t n0,
                            size_t dim,
                            size_t d,
                            double eta,
                            uint64_t seed,
                            struct GmsPoints **out,
                            double *basis_out,
                            size_t basis_len);

/**
 * Runs GMS. `d = 0` estimates the dimension from the largest log-eigengap;
 * `delta <= 0` and `max_iter = 0` select the defaults.
 *
 * # Safety
 * `points` must be a live handle and `out` writable.
 */
enum GmsStatus gms_recover(const struct GmsPoints *points,
                           size_t d,
                           double delta,
                           size_t max_iter,
                           struct GmsResult **out);

/**
 * # Safety
 * `result` must come from this library or be null.
 */
void gms_result_free(struct GmsResult *result);

/**
 * Ambient and subspace dimension of the recovered subspace.
 *
 * # Safety
 * `result` must be a live handle; `ambient` and `d` may be null.
 */
enum GmsStatus gms_result_dims(const struct GmsResult *result, size_t *ambient, size_t *d);

/**
 * Writes the `D × d` orthonormal basis row-major.
 *
 * # Safety
 * `out` must hold `out_len` doubles.
 */
enum GmsStatus gms_result_basis(const struct GmsResult *result, double *out, size_t out_len);

/**
 * Writes the `D × D` minimizer `Q̂` row-major.
 *
 * # Safety
 * `out` must hold `out_len` doubles.
 */
enum GmsStatus gms_result_q(const struct GmsResult *result, double *out, size_t out_len);

/**
 * Iteration count and convergence flag of the underlying solve.
 *
 * # Safety
 * `result` must be a live handle; the out pointers may be null.
 */
enum GmsStatus gms_result_solve_info(const struct GmsResult *result,
                                     size_t *iterations,
                                     bool *converged,
                                     double *objective);

/**
 * Frobenius distance between the projectors onto the spans of two
 * row-major orthonormal bases of sizes `dim × da` and `dim × db`.
 *
 * # Safety
 * `a` and `b` must hold `dim * da` and `dim * db` doubles; `out` writable.
 */
enum GmsStatus gms_recovery_error(const double *a,
                                  size_t da,
                                  const double *b,
                                  size_t db,
                                  size_t dim,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GMS_H */
