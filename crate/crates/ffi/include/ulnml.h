#ifndef ULNML_H
#define ULNML_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UlnmlStatus {
  ULNML_STATUS_OK = 0,
  ULNML_STATUS_NULL_POINTER = 1,
  ULNML_STATUS_INVALID_INPUT = 2,
  ULNML_STATUS_DIMENSION_MISMATCH = 3,
  ULNML_STATUS_NUMERICAL = 4,
  ULNML_STATUS_DOMAIN = 5,
  ULNML_STATUS_IO = 6,
  ULNML_STATUS_PANIC = 7,
} UlnmlStatus;

/*
 Normalizer variant for ridge handles.
 */
typedef enum UlnmlRidgeNormalizer {
  ULNML_RIDGE_NORMALIZER_FULL = 0,
  ULNML_RIDGE_NORMALIZER_DIAGONAL = 1,
} UlnmlRidgeNormalizer;

/*
 Opaque Gaussian graphical model problem.
 */
typedef struct UlnmlGgm UlnmlGgm;

/*
 Opaque ridge regression problem.
 */
typedef struct UlnmlRidge UlnmlRidge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the most recent call on this thread if it failed, else null.
 Valid until the next library call on the same thread.
 */
const char *ulnml_last_error(void);

/*
 Tikhonov normalizer bound `Σ ½ log(1 + h_j / (s λ_j))`.

 # Safety
 `h` and `lambda` must point to `len` doubles; `out` must be writable.
 */
enum UlnmlStatus ulnml_log_normalizer_tikhonov(const double *h,
                                               const double *lambda,
                                               size_t len,
                                               double scale,
                                               double *out);

/*
 Lasso normalizer bound `Σ [½ log(e/2π) + ½ log(1 + h_j / λ_j²)]`.

 # Safety
 As [`ulnml_log_normalizer_tikhonov`].
 */
enum UlnmlStatus ulnml_log_normalizer_lasso(const double *h,
                                            const double *lambda,
                                            size_t len,
                                            double *out);

/*
 Closed-form Tikhonov weight update projected to `[lo, hi]^len`.

 # Safety
 `theta` and `h` must point to `len` doubles, `out` to `len` writable ones.
 */
enum UlnmlStatus ulnml_update_tikhonov(const double *theta,
                                       const double *h,
                                       size_t len,
                                       double scale,
                                       double lo,
                                       double hi,
                                       double *out);

/*
 Closed-form lasso weight update projected to `[lo, hi]^len`.

 # Safety
 As [`ulnml_update_tikhonov`].
 */
enum UlnmlStatus ulnml_update_lasso(const double *theta,
                                    const double *h,
                                    size_t len,
                                    double lo,
                                    double hi,
                                    double *out);

/*
 Builds a ridge problem from an `n × p` row-major design and `n` targets.

 # Safety
 `x` must hold `n * p` doubles, `y` `n` doubles; `out` must be writable.
 */
enum UlnmlStatus ulnml_ridge_new(const double *x,
                                 size_t n,
                                 size_t p,
                                 const double *y,
                                 enum UlnmlRidgeNormalizer normalizer,
                                 struct UlnmlRidge **out);

/*
 Runs MDL-RS from the box center. `lambda_out` and `beta_out` receive `p`
 values each; `ulnml_out` and `iterations_out` may be null.

 # Safety
 `handle` must come from [`ulnml_ridge_new`]; buffers must hold `p` doubles.
 */
enum UlnmlStatus ulnml_ridge_fit(const struct UlnmlRidge *handle,
                                 size_t max_iter,
                                 double rel_tol,
                                 double *lambda_out,
                                 double *beta_out,
                                 double *ulnml_out,
                                 size_t *iterations_out);

/*
 Releases a ridge handle. Null is ignored.

 # Safety
 `handle` must come from [`ulnml_ridge_new`] and not be used afterwards.
 */
void ulnml_ridge_free(struct UlnmlRidge *handle);

/*
 Builds a graphical model problem from an `n × m` row-major data matrix.
 `radius <= 0` selects the data-dependent default.

 # Safety
 `data` must hold `n * m` doubles; `out` must be writable.
 */
enum UlnmlStatus ulnml_ggm_new(const double *data,
                               size_t n,
                               size_t m,
                               double radius,
                               struct UlnmlGgm **out);

/*
 Number of free pair weights, `m (m − 1) / 2`; 0 for a null handle.

 # Safety
 `handle` must be null or come from [`ulnml_ggm_new`].
 */
size_t ulnml_ggm_num_pairs(const struct UlnmlGgm *handle);

/*
 Runs MDL-RS from the box center. `theta_out` receives the `m × m`
 precision (row-major), `lambda_out` the pair weights in upper-triangular
 row order. `ulnml_out` and `iterations_out` may be null.

 # Safety
 `handle` must come from [`ulnml_ggm_new`]; buffers must be sized as above.
 */
enum UlnmlStatus ulnml_ggm_fit(const struct UlnmlGgm *handle,
                               size_t max_iter,
                               double rel_tol,
                               double *theta_out,
                               double *lambda_out,
                               double *ulnml_out,
                               size_t *iterations_out);

/*
 Releases a graphical model handle. Null is ignored.

 # Safety
 `handle` must come from [`ulnml_ggm_new`] and not be used afterwards.
 */
void ulnml_ggm_free(struct UlnmlGgm *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ULNML_H */
