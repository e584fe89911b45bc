/* ecglab C ABI: extremal cocycle growth and stable-field experiments. */

#ifndef ECGLAB_H
#define ECGLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum EcglabStatus {
  ECGLAB_STATUS_OK = 0,
  ECGLAB_STATUS_NULL_POINTER = 1,
  ECGLAB_STATUS_INVALID_ARGUMENT = 2,
  ECGLAB_STATUS_CAP_EXCEEDED = 3,
  ECGLAB_STATUS_SAMPLER_COLLAPSE = 4,
  ECGLAB_STATUS_INTERNAL = 5,
} EcglabStatus;

/**
 * Curve classification.
 */
typedef enum EcglabClassification {
  ECGLAB_CLASSIFICATION_NON_VANISHING = 0,
  ECGLAB_CLASSIFICATION_VANISHING = 1,
  ECGLAB_CLASSIFICATION_INCONCLUSIVE = 2,
} EcglabClassification;

/**
 * Opaque model handle.
 */
typedef struct EcglabModel EcglabModel;

/**
 * One estimated point of the normalized extremal cocycle curve.
 */
typedef struct EcglabEcgPoint {
  uint32_t n;
  /**
   * Monte Carlo estimate of the expected pointwise maximum
   */
  double abar;
  /**
   * standard error of that estimate
   */
  double se;
  /**
   * normalized extremal cocycle C_n
   */
  double cn;
} EcglabEcgPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ecglab_version(void);

/**
 * Copies the last error message on this thread into `buf` (truncated to
 * `len - 1` bytes, always NUL-terminated).  Returns the full message
 * length, or 0 when no error is pending.
 *
 * # Safety
 * `buf` must point to `len` writable bytes (or be NULL with `len == 0`).
 */
uintptr_t ecglab_last_error(char *buf, uintptr_t len);

/**
 * Creates the full free-group model `F_d` on its tree boundary.
 *
 * # Safety
 * `out` must be a valid pointer to a model-handle slot.
 */
enum EcglabStatus ecglab_model_tree_full(uint32_t rank, struct EcglabModel **out);

/**
 * Creates a subgroup model from a spec string (`full`, `zk:1,0`,
 * `c2c3:x,y`).  `measure` is 0 for the subgroup's empirical Patterson
 * measure, 1 for the ambient uniform measure.  `max_radius` bounds the
 * ball radii later queries may use.
 *
 * # Safety
 * `subgroup` must be a NUL-terminated string and `out` a valid slot.
 */
enum EcglabStatus ecglab_model_tree_subgroup(uint32_t rank,
                                             const char *subgroup,
                                             uint32_t measure,
                                             uint32_t ps_depth,
                                             uint32_t max_radius,
                                             struct EcglabModel **out);

/**
 * Creates the hyperbolic-plane lattice model on its circle boundary with
 * matrix balls enumerated up to `max_radius` (capped at 10).
 *
 * # Safety
 * `out` must be a valid pointer to a model-handle slot.
 */
enum EcglabStatus ecglab_model_circle_harmonic(uint32_t max_radius, struct EcglabModel **out);

/**
 * Releases a model handle.  NULL is a no-op.
 *
 * # Safety
 * `model` must have been produced by an `ecglab_model_*` constructor and
 * not freed before.
 */
void ecglab_model_free(struct EcglabModel *model);

/**
 * Dimension `v` of the model's conformal density (`V_n = exp(v n)`).
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum EcglabStatus ecglab_model_dimension(const struct EcglabModel *model, double *out);

/**
 * Estimates the ECG curve over `n = n_min..=n_max` with `samples` boundary
 * draws and the given master seed.  `out_points` must hold
 * `n_max - n_min + 1` entries; the classification lands in `out_class`.
 *
 * # Safety
 * `model`, `out_points` (with capacity for the full range) and
 * `out_class` must be valid.
 */
enum EcglabStatus ecglab_ecg_curve(const struct EcglabModel *model,
                                   uint32_t n_min,
                                   uint32_t n_max,
                                   uintptr_t samples,
                                   uint64_t seed,
                                   struct EcglabEcgPoint *out_points,
                                   enum EcglabClassification *out_class);

/**
 * Exact ball size of `F_d`: the number of reduced words of length at most
 * `n`.  Fails with `CAP_EXCEEDED` if the count does not fit in 64 bits.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EcglabStatus ecglab_ball_count(uint32_t rank, uint32_t n, uint64_t *out);

/**
 * Exact subgroup growth count `V_H(1,1,m)` for a spec string.
 *
 * # Safety
 * `subgroup` must be NUL-terminated; `out` valid.
 */
enum EcglabStatus ecglab_subgroup_ball_count(uint32_t rank,
                                             const char *subgroup,
                                             uint32_t m,
                                             uint64_t *out);

/**
 * Fraction of the radius-`r` sphere within tree distance `c` of the orbit
 * of `H ∩ B_r`, as a double.
 *
 * # Safety
 * `subgroup` must be NUL-terminated; `out` valid.
 */
enum EcglabStatus ecglab_shell_mass(uint32_t rank,
                                    const char *subgroup,
                                    uint32_t r,
                                    uint32_t c,
                                    double *out);

/**
 * Fills `out` with `count` draws of a symmetric α-stable variable.
 *
 * # Safety
 * `out` must point to `count` writable doubles.
 */
enum EcglabStatus ecglab_sample_sas(double alpha,
                                    double scale,
                                    uint64_t seed,
                                    uintptr_t count,
                                    double *out);

/**
 * The series constant `c_alpha`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EcglabStatus ecglab_c_alpha(double alpha, double *out);

/**
 * Median of `M_n / V_n^{1/alpha}` over `replicates` simulated partial
 * maxima of the stable field, one radius per entry of `radii`.
 *
 * # Safety
 * `model` must be valid; `radii` must hold `radii_len` entries; `out`
 * must hold `radii_len` doubles.
 */
enum EcglabStatus ecglab_maxima_medians(const struct EcglabModel *model,
                                        const uint32_t *radii,
                                        uintptr_t radii_len,
                                        double alpha,
                                        uintptr_t terms,
                                        uintptr_t replicates,
                                        uint64_t seed,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECGLAB_H */
