#ifndef LASSERRE_BOUNDS_H
#define LASSERRE_BOUNDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LbStatus {
  LB_STATUS_OK = 0,
  LB_STATUS_NULL_POINTER = 1,
  LB_STATUS_INVALID_ARGUMENT = 2,
  LB_STATUS_PARSE = 3,
  LB_STATUS_DIMENSION_MISMATCH = 4,
  LB_STATUS_INVALID_DOMAIN = 5,
  LB_STATUS_CONDITIONING = 6,
  LB_STATUS_NUMERICAL = 7,
  LB_STATUS_BUFFER_TOO_SMALL = 8,
  LB_STATUS_PANIC = 9,
} LbStatus;

typedef struct LbBound LbBound;

typedef struct LbDomain LbDomain;

typedef struct LbPolynomial LbPolynomial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of the calling thread into `buf` as a NUL-terminated string.
 *
 * Returns the message length in bytes without the terminator. When `buf_len` is too small the
 * message is truncated; pass `buf = NULL` to query the length.
 *
 * # Safety
 * `buf` must be null or point to `buf_len` writable bytes.
 */
size_t lb_last_error_message(char *buf, size_t buf_len);

/**
 * Parses `source` as a polynomial in `x1..x{n_vars}`.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LbStatus lb_polynomial_parse(const char *source, size_t n_vars, struct LbPolynomial **out);

/**
 * Evaluates `p` at `x[0..n]`.
 *
 * # Safety
 * `p` must come from [`lb_polynomial_parse`], `x` must hold `n` doubles and `out` be valid.
 */
enum LbStatus lb_polynomial_evaluate(const struct LbPolynomial *p,
                                     const double *x,
                                     size_t n,
                                     double *out);

/**
 * Total degree of `p`, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or come from [`lb_polynomial_parse`].
 */
uint32_t lb_polynomial_degree(const struct LbPolynomial *p);

/**
 * Number of variables of `p`, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or come from [`lb_polynomial_parse`].
 */
size_t lb_polynomial_n_vars(const struct LbPolynomial *p);

/**
 * # Safety
 * `p` must be null or an unreleased handle from [`lb_polynomial_parse`].
 */
void lb_polynomial_free(struct LbPolynomial *p);

/**
 * Box `[lo_i, hi_i]`; bounds are rational literals such as `"-2"`, `"1/3"` or `"2.048"`.
 *
 * # Safety
 * `lo` and `hi` must each hold `n` NUL-terminated strings and `out` be valid.
 */
enum LbStatus lb_domain_box(const char *const *lo,
                            const char *const *hi,
                            size_t n,
                            struct LbDomain **out);

/**
 * Standard simplex `{x >= 0, sum x <= 1}` in dimension `n`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LbStatus lb_domain_simplex(size_t n, struct LbDomain **out);

/**
 * Unit Euclidean ball in dimension `n`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LbStatus lb_domain_ball(size_t n, struct LbDomain **out);

/**
 * Dimension of `d`, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or come from an `lb_domain_*` constructor.
 */
size_t lb_domain_dim(const struct LbDomain *d);

/**
 * # Safety
 * `d` must be null or an unreleased domain handle.
 */
void lb_domain_free(struct LbDomain *d);

/**
 * Upper bound of order `r` for the minimum of `f` over `d`. A nonzero `rescale` maps a box to
 * `[-1, 1]^n` first.
 *
 * # Safety
 * `f` and `d` must be valid handles and `out` a valid pointer.
 */
enum LbStatus lb_bound_compute(const struct LbPolynomial *f,
                               const struct LbDomain *d,
                               uint32_t r,
                               int32_t rescale,
                               struct LbBound **out);

/**
 * Bound value, or NaN for a null handle.
 *
 * # Safety
 * `b` must be null or come from [`lb_bound_compute`].
 */
double lb_bound_value(const struct LbBound *b);

/**
 * 1-norm condition number of the equilibrated moment matrix, or NaN for a null handle.
 *
 * # Safety
 * `b` must be null or come from [`lb_bound_compute`].
 */
double lb_bound_cond(const struct LbBound *b);

/**
 * Copies the eigenvector into `buf` and writes its length to `len_out`.
 *
 * Call with `buf = NULL` to query the length; a short buffer yields `BufferTooSmall`.
 *
 * # Safety
 * `b` must be a valid handle, `buf` null or `buf_len` writable doubles, `len_out` valid.
 */
enum LbStatus lb_bound_eigenvector(const struct LbBound *b,
                                   double *buf,
                                   size_t buf_len,
                                   size_t *len_out);

/**
 * Draws `count` points from the density of `b` over `d` with the given seed.
 *
 * `points` receives `count * n` doubles in row-major order and `values` receives `f` at each
 * point. The same seed always yields the same output.
 *
 * # Safety
 * All handles must be valid; `points` must hold `count * n` and `values` `count` doubles.
 */
enum LbStatus lb_sample(const struct LbPolynomial *f,
                        const struct LbDomain *d,
                        const struct LbBound *b,
                        size_t count,
                        uint64_t seed,
                        double *points,
                        double *values);

/**
 * # Safety
 * `b` must be null or an unreleased handle from [`lb_bound_compute`].
 */
void lb_bound_free(struct LbBound *b);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LASSERRE_BOUNDS_H */
