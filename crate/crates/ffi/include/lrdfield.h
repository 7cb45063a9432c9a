#ifndef LRDFIELD_H
#define LRDFIELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LrdStatus {
  LRD_STATUS_OK = 0,
  LRD_STATUS_NULL_POINTER = 1,
  LRD_STATUS_INVALID_ARGUMENT = 2,
  LRD_STATUS_DOMAIN = 3,
  LRD_STATUS_NON_CONVERGENCE = 4,
  LRD_STATUS_BUDGET_EXCEEDED = 5,
  LRD_STATUS_DIVERGENT_INTEGRAL = 6,
  LRD_STATUS_NOT_POSITIVE_DEFINITE = 7,
  LRD_STATUS_UNSUPPORTED_DIMENSION = 8,
  LRD_STATUS_RANK_NOT_FOUND = 9,
  LRD_STATUS_EMPTY_SAMPLE = 10,
  LRD_STATUS_CONFIG = 11,
  LRD_STATUS_IO = 12,
  LRD_STATUS_PANIC = 13,
} LrdStatus;

/**
 * Cholesky factor of the field covariance on a surface's nodes.
 */
typedef struct LrdFieldSampler LrdFieldSampler;

/**
 * Prepared sampler of the limit X_κ.
 */
typedef struct LrdLimitSampler LrdLimitSampler;

/**
 * Surface with its quadrature rule.
 */
typedef struct LrdSurface LrdSurface;

typedef struct LrdRateBound {
  double a;
  double kappa1;
  double tail_exponent;
  double bound;
  double best_bound;
  /**
   * NaN when condition (bb) fails.
   */
  double alpha_star;
  /**
   * NaN unless tau = 0.
   */
  double g_exponent;
  /**
   * 1, 2, or 0 for tau = 0.
   */
  int32_t case_number;
  int32_t tau_in_window;
} LrdRateBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *lrd_last_error(void);

/**
 * Static NUL-terminated version string.
 */
const char *lrd_version(void);

/**
 * Probabilists' Hermite polynomial H_k(t).
 */
double lrd_hermite_poly(uint32_t k, double t);

/**
 * Writes C_0..C_J of a JSON integrand (e.g. `{"kind":"power","l":2,"threshold":1}`)
 * into `out` (length j_max+1) and its Hermite rank into `rank` (-1 if none).
 */
enum LrdStatus lrd_integrand_coefficients(const char *integrand_json,
                                          uint32_t j_max,
                                          double *out,
                                          int32_t *rank);

/**
 * shape: 0 sphere, 1 cube boundary.
 */
enum LrdStatus lrd_surface_new(uint32_t shape,
                               uint32_t d,
                               double r,
                               uint32_t resolution,
                               struct LrdSurface **out);

void lrd_surface_free(struct LrdSurface *s);

/**
 * Number of quadrature nodes, 0 for a null handle.
 */
size_t lrd_surface_len(const struct LrdSurface *s);

/**
 * Closed-form area, NaN for a null handle.
 */
double lrd_surface_area(const struct LrdSurface *s);

/**
 * Copies nodes (row-major, len·d values) and weights (len values).
 */
enum LrdStatus lrd_surface_nodes(const struct LrdSurface *s, double *nodes, double *weights);

/**
 * 𝒦(x) = ∫ e^{i⟨x,u⟩} dσ(u); `x` has d entries.
 */
enum LrdStatus lrd_surface_fourier(const struct LrdSurface *s,
                                   const double *x,
                                   double *re,
                                   double *im);

/**
 * ∬ ‖x - y‖^{-β} dσ dσ by node quadrature with singular correction.
 */
enum LrdStatus lrd_double_integral_power(const struct LrdSurface *s, double beta, double *out);

/**
 * κ! ∬ ‖x - y‖^{-κα}.
 */
enum LrdStatus lrd_variance_oracle(uint32_t kappa,
                                   double alpha,
                                   const struct LrdSurface *s,
                                   double *out);

/**
 * Cholesky sampler for a JSON field spec (e.g. `{"d":2,"alpha":0.4,"L":"constant"}`)
 * on the nodes of `s`.
 */
enum LrdStatus lrd_field_sampler_new(const char *field_json,
                                     const struct LrdSurface *s,
                                     struct LrdFieldSampler **out);

void lrd_field_sampler_free(struct LrdFieldSampler *f);

/**
 * One field realization at the surface nodes into `out` (node count values).
 */
enum LrdStatus lrd_field_sample(const struct LrdFieldSampler *f, uint64_t seed, double *out);

/**
 * Limit sampler on the grid [-Λ, Λ]^d with `origin_levels` dyadic levels
 * around the origin. `s` must be the unit surface.
 */
enum LrdStatus lrd_limit_sampler_new(const struct LrdSurface *s,
                                     uint32_t kappa,
                                     double alpha,
                                     double lambda,
                                     uint32_t cells_per_axis,
                                     uint32_t origin_levels,
                                     struct LrdLimitSampler **out);

void lrd_limit_sampler_free(struct LrdLimitSampler *p);

/**
 * One draw; `imag_residual` may be null.
 */
enum LrdStatus lrd_limit_draw(const struct LrdLimitSampler *p,
                              uint64_t seed,
                              double *value,
                              double *imag_residual);

/**
 * `n` draws with seeds derived from `seed` into `out`.
 */
enum LrdStatus lrd_limit_draws(const struct LrdLimitSampler *p,
                               size_t n,
                               uint64_t seed,
                               double *out);

/**
 * Exact variance of the discretized integral (κ ≤ 2).
 */
enum LrdStatus lrd_limit_grid_variance(const struct LrdLimitSampler *p, double *out);

/**
 * Two-sample Kolmogorov distance.
 */
enum LrdStatus lrd_kolmogorov_distance(const double *a,
                                       size_t na,
                                       const double *b,
                                       size_t nb,
                                       double *out);

enum LrdStatus lrd_rate_bound(uint32_t d,
                              double alpha,
                              uint32_t kappa,
                              double tau,
                              struct LrdRateBound *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LRDFIELD_H */
