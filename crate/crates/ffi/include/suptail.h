#ifndef SUPTAIL_H
#define SUPTAIL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SuptailRegime {
  SUPTAIL_REGIME_A = 0,
  SUPTAIL_REGIME_B = 1,
  SUPTAIL_REGIME_C = 2,
} SuptailRegime;

typedef enum SuptailStatus {
  SUPTAIL_STATUS_OK = 0,
  SUPTAIL_STATUS_INVALID_ARGUMENT = 1,
  // The bound's validity conditions fail at this input.
  SUPTAIL_STATUS_NOT_APPLICABLE = 2,
  SUPTAIL_STATUS_STATE_SPACE_TOO_LARGE = 3,
  SUPTAIL_STATUS_NULL_POINTER = 4,
  SUPTAIL_STATUS_PANIC = 5,
} SuptailStatus;

// Bound constants plus the density parameters of the class.
typedef struct SuptailParams SuptailParams;

// A sorted uniform sample.
typedef struct SuptailPath SuptailPath;

// Poisson lower-bound construction at rate `n`.
typedef struct SuptailLowerBound {
  double hat_u;
  uint64_t m_star;
  double log_t;
  // `1 - exp(-T)`
  double probability;
} SuptailLowerBound;

typedef struct SuptailCondition {
  bool holds;
  // `log LHS - log RHS`
  double log_margin;
} SuptailCondition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or `NULL` after a
// successful one. The pointer stays valid until the next call into the
// library on the same thread.
const char *suptail_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *suptail_version(void);

// Allocates parameters holding the defaults. Release with
// [`suptail_params_free`].
struct SuptailParams *suptail_params_new(void);

// # Safety
// `params` must be `NULL` or a pointer from [`suptail_params_new`] that has
// not been freed.
void suptail_params_free(struct SuptailParams *params);

// Sets one constant by name (`C1` .. `C6`, `K`, `alpha`, `alpha_bar`, `C`,
// `A0`, `Cbar`). The set is validated as a whole; on failure nothing changes.
//
// # Safety
// `params` must be a live handle and `name` a NUL-terminated string.
enum SuptailStatus suptail_params_set(struct SuptailParams *params, const char *name, double value);

// Sets the density parameter `D ≥ 1` and exponent `L > 0` of the class.
//
// # Safety
// `params` must be a live handle.
enum SuptailStatus suptail_params_set_class(struct SuptailParams *params, double d, double l);

// # Safety
// `out_regime` must be writable.
enum SuptailStatus suptail_classify_regime(uint64_t n,
                                           double sigma2,
                                           enum SuptailRegime *out_regime);

// # Safety
// `params` must be `NULL` or a live handle; `out_u` must be writable.
enum SuptailStatus suptail_threshold_u(uint64_t n,
                                       double sigma2,
                                       const struct SuptailParams *params,
                                       double *out_u);

// # Safety
// `params` must be `NULL` or a live handle; `out_u_bar` must be writable.
enum SuptailStatus suptail_threshold_u_bar(double sigma2,
                                           const struct SuptailParams *params,
                                           double *out_u_bar);

// `û(σ)`.
//
// # Safety
// `params` must be `NULL` or a live handle; `out_level` must be writable.
enum SuptailStatus suptail_lower_bound_level(uint64_t n,
                                             double sigma2,
                                             const struct SuptailParams *params,
                                             double *out_level);

// Main tail bound, valid for `v ≥ u(σ)`.
//
// # Safety
// `params` must be `NULL` or a live handle; `out_bound` must be writable.
enum SuptailStatus suptail_upper_bound(uint64_t n,
                                       double sigma2,
                                       double v,
                                       const struct SuptailParams *params,
                                       double *out_bound);

// Gaussian-type bound for `ū(σ) ≤ v ≤ √n σ²` in regime C.
//
// # Safety
// `params` must be `NULL` or a live handle; `out_bound` must be writable.
enum SuptailStatus suptail_upper_bound_extension(uint64_t n,
                                                 double sigma2,
                                                 double v,
                                                 const struct SuptailParams *params,
                                                 double *out_bound);

// Bound for `ū(σ) < v ≤ u(σ)` in regime C.
//
// # Safety
// `params` must be `NULL` or a live handle; `out_bound` must be writable.
enum SuptailStatus suptail_upper_bound_gap(uint64_t n,
                                           double sigma2,
                                           double v,
                                           const struct SuptailParams *params,
                                           double *out_bound);

// Bennett's inequality for a single function.
//
// # Safety
// `out_bound` must be writable.
enum SuptailStatus suptail_bennett(uint64_t n, double sigma2, double v, double *out_bound);

// # Safety
// `params` must be `NULL` or a live handle; `out_bound` must be writable.
enum SuptailStatus suptail_bennett_simplified(uint64_t n,
                                              double sigma2,
                                              double v,
                                              const struct SuptailParams *params,
                                              double *out_bound);

// # Safety
// `out_bound` must be writable.
enum SuptailStatus suptail_analytic_lower_bound(double n,
                                                double sigma2,
                                                struct SuptailLowerBound *out_bound);

// Sufficient condition for the lower bound to exceed `1 - delta`.
//
// # Safety
// `out_condition` must be writable.
enum SuptailStatus suptail_check_sufficient_condition(double n,
                                                      double sigma2,
                                                      double delta,
                                                      struct SuptailCondition *out_condition);

// Exact `P(max_j |N_j - nσ²| ≥ √n v)` for small instances.
//
// # Safety
// `out_probability` must be writable.
enum SuptailStatus suptail_exact_tail_small(uint64_t n,
                                            double sigma2,
                                            double v,
                                            double *out_probability);

// # Safety
// `out_low` and `out_high` must be writable.
enum SuptailStatus suptail_wilson_interval(uint64_t hits,
                                           uint64_t reps,
                                           double confidence,
                                           double *out_low,
                                           double *out_high);

// Draws `n` uniform points from stream `(seed, replication)`. Release with
// [`suptail_path_free`].
//
// # Safety
// `out_path` must be writable.
enum SuptailStatus suptail_path_sample_uniform(size_t n,
                                               uint64_t seed,
                                               uint64_t replication,
                                               struct SuptailPath **out_path);

// Copies `len` points in `[0, 1]`. Release with [`suptail_path_free`].
//
// # Safety
// `points` must point to `len` readable doubles; `out_path` must be writable.
enum SuptailStatus suptail_path_from_points(const double *points,
                                            size_t len,
                                            struct SuptailPath **out_path);

// # Safety
// `path` must be `NULL` or a live handle.
void suptail_path_free(struct SuptailPath *path);

// Number of points, 0 for `NULL`.
//
// # Safety
// `path` must be `NULL` or a live handle.
size_t suptail_path_len(const struct SuptailPath *path);

// Copies the sorted points into `buffer`, which must hold
// [`suptail_path_len`] doubles.
//
// # Safety
// `path` must be a live handle and `buffer` writable for `capacity` doubles.
enum SuptailStatus suptail_path_points(const struct SuptailPath *path,
                                       double *buffer,
                                       size_t capacity);

// Supremum of the centered grid class of cell width `sigma2`, with the
// lowest one-based cell attaining it.
//
// # Safety
// `path` must be a live handle; `out_value` and `out_cell` must be writable.
enum SuptailStatus suptail_path_sup_increments(const struct SuptailPath *path,
                                               double sigma2,
                                               double *out_value,
                                               uint64_t *out_cell);

// Modulus of continuity of `G_n` at width `delta`.
//
// # Safety
// `path` must be a live handle; `out_value` must be writable.
enum SuptailStatus suptail_path_modulus(const struct SuptailPath *path,
                                        double delta,
                                        double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPTAIL_H */
