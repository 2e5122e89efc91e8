#ifndef OAMPNR_H
#define OAMPNR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum OampnrStatus {
  OAMPNR_STATUS_OK = 0,
  OAMPNR_STATUS_NULL_POINTER = 1,
  OAMPNR_STATUS_INVALID_PARAMETER = 2,
  OAMPNR_STATUS_CONFIG = 3,
  OAMPNR_STATUS_DEGENERATE_COVARIANCE = 4,
  OAMPNR_STATUS_CAP_EXCEEDED = 5,
  OAMPNR_STATUS_PRECISION_LOSS = 6,
  OAMPNR_STATUS_TAIL_TOLERANCE = 7,
  OAMPNR_STATUS_TOLERANCE = 8,
  OAMPNR_STATUS_IO = 9,
  OAMPNR_STATUS_BUFFER_TOO_SMALL = 10,
  OAMPNR_STATUS_PANIC = 11,
} OampnrStatus;

/**
 * Joint photon-number distribution P(N, M).
 */
typedef struct OampnrDistribution OampnrDistribution;

/**
 * Run profile: geometry, source parameters and numerical settings.
 */
typedef struct OampnrProfile OampnrProfile;

/**
 * Gaussian state of one (ℓ1, ℓ2) mode pair.
 */
typedef struct OampnrState OampnrState;

/**
 * Monte Carlo check of a distribution.
 */
typedef struct OampnrAgreement {
  double tv_distance;
  double aggregate_stderr;
  double coverage;
  double g2_analytic;
  double g2_estimate;
  double g2_stderr;
  /**
   * 1 when the TV distance is below three aggregate standard errors and
   * the g² estimate lies within three of its own.
   */
  int32_t passes;
} OampnrAgreement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *oampnr_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *oampnr_version(void);

/**
 * The built-in profile: double slit, fitted source, 50:50 splitter.
 */
struct OampnrProfile *oampnr_profile_paper_fit(void);

/**
 * Parses a JSON profile. Unknown keys are rejected.
 *
 * # Safety
 * `json` must be a nul-terminated string; `profile_out` must be writable.
 */
enum OampnrStatus oampnr_profile_from_json(const char *json, struct OampnrProfile **profile_out);

/**
 * Writes the 16-hex-digit profile digest and a nul into `buf`, which must
 * hold at least 17 bytes.
 *
 * # Safety
 * `buf` must be writable for `len` bytes.
 */
enum OampnrStatus oampnr_profile_digest(const struct OampnrProfile *profile, char *buf, size_t len);

/**
 * # Safety
 * `profile` must come from this library and not be used afterwards.
 */
void oampnr_profile_free(struct OampnrProfile *profile);

/**
 * State of the mode pair (ℓ1, ℓ2) under a profile's geometry and source.
 *
 * # Safety
 * `state_out` must be writable.
 */
enum OampnrStatus oampnr_state_from_profile(const struct OampnrProfile *profile,
                                            int64_t l1,
                                            int64_t l2,
                                            struct OampnrState **state_out);

/**
 * State from explicit moments: means μ1, μ2, variances σ1, σ2 (with
 * ⟨|α − μ1|²⟩ = 2σ1) and cross term η. A rank-deficient covariance is
 * accepted only for l1 = l2, which denotes one mode seen in both arms.
 *
 * # Safety
 * `state_out` must be writable.
 */
enum OampnrStatus oampnr_state_from_moments(int64_t l1,
                                            int64_t l2,
                                            double mu1_re,
                                            double mu1_im,
                                            double mu2_re,
                                            double mu2_im,
                                            double sigma1,
                                            double sigma2,
                                            double eta_re,
                                            double eta_im,
                                            struct OampnrState **state_out);

/**
 * Mean photon numbers of the two modes before the splitter.
 *
 * # Safety
 * `n1_out` and `n2_out` must be writable.
 */
enum OampnrStatus oampnr_state_mean_photons(const struct OampnrState *state,
                                            double *n1_out,
                                            double *n2_out);

/**
 * Classical intensity correlation ⟨I1 I2⟩ / (⟨I1⟩⟨I2⟩).
 *
 * # Safety
 * `g2_out` must be writable.
 */
enum OampnrStatus oampnr_state_g2_classical(const struct OampnrState *state, double *g2_out);

/**
 * Photon-number-resolved coherence g̃²(n1, n2) behind a splitter of angle θ.
 *
 * # Safety
 * `g2_out` must be writable.
 */
enum OampnrStatus oampnr_state_g2_tilde(const struct OampnrState *state,
                                        double theta,
                                        size_t n1,
                                        size_t n2,
                                        double *g2_out);

/**
 * # Safety
 * `state` must come from this library and not be used afterwards.
 */
void oampnr_state_free(struct OampnrState *state);

/**
 * P(N, M) for N ≤ nmax, M ≤ mmax behind a splitter of angle θ, using the
 * profile's numerical settings (or the defaults when `profile` is null).
 *
 * # Safety
 * `dist_out` must be writable.
 */
enum OampnrStatus oampnr_joint_pnr(const struct OampnrState *state,
                                   const struct OampnrProfile *profile,
                                   double theta,
                                   size_t nmax,
                                   size_t mmax,
                                   struct OampnrDistribution **dist_out);

/**
 * Grid size (nmax + 1, mmax + 1) and the probability mass beyond it.
 *
 * # Safety
 * Output pointers must be writable.
 */
enum OampnrStatus oampnr_distribution_shape(const struct OampnrDistribution *dist,
                                            size_t *rows_out,
                                            size_t *cols_out,
                                            double *tail_mass_out);

/**
 * Copies P(N, M) row-major (index N·cols + M) into `buf`.
 *
 * # Safety
 * `buf` must be writable for `len` doubles.
 */
enum OampnrStatus oampnr_distribution_copy(const struct OampnrDistribution *dist,
                                           double *buf,
                                           size_t len);

/**
 * # Safety
 * `dist` must come from this library and not be used afterwards.
 */
void oampnr_distribution_free(struct OampnrDistribution *dist);

/**
 * Samples `samples` photon-count pairs with `seed` and compares them with
 * `dist`, which must have been computed from the same state and θ.
 *
 * # Safety
 * `agreement_out` must be writable.
 */
enum OampnrStatus oampnr_montecarlo_check(const struct OampnrState *state,
                                          const struct OampnrDistribution *dist,
                                          double theta,
                                          uint64_t samples,
                                          uint64_t seed,
                                          struct OampnrAgreement *agreement_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OAMPNR_H */
