#ifndef MSALAB_H
#define MSALAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsalabStatus {
  MSALAB_STATUS_OK = 0,
  MSALAB_STATUS_NULL_POINTER = 1,
  MSALAB_STATUS_INVALID_ARGUMENT = 2,
  MSALAB_STATUS_EMPTY_WINDOW = 3,
  MSALAB_STATUS_NOT_IN_BASIS = 4,
  MSALAB_STATUS_RESONANT_ENERGY = 5,
  MSALAB_STATUS_NON_FINITE = 6,
  MSALAB_STATUS_NO_SAMPLES = 7,
  MSALAB_STATUS_BUFFER_TOO_SMALL = 8,
  MSALAB_STATUS_PROJECTIONS_OVERLAP = 9,
  MSALAB_STATUS_INTERNAL = 10,
} MsalabStatus;

typedef enum MsalabLaw {
  MSALAB_LAW_CAUCHY = 0,
  MSALAB_LAW_GAUSSIAN = 1,
} MsalabLaw;

typedef enum MsalabStatistics {
  MSALAB_STATISTICS_BOSONIC = 0,
  MSALAB_STATISTICS_FERMIONIC = 1,
} MsalabStatistics;

/**
 * Outcome of a bound comparison.
 */
typedef enum MsalabBoundStatus {
  MSALAB_BOUND_STATUS_OK = 0,
  MSALAB_BOUND_STATUS_VIOLATED = 1,
  MSALAB_BOUND_STATUS_UNRESOLVABLE = 2,
} MsalabBoundStatus;

/**
 * Opaque operator handle.
 */
typedef struct MsalabHamiltonian MsalabHamiltonian;

/**
 * Opaque eigendecomposition handle.
 */
typedef struct MsalabSpectrum MsalabSpectrum;

/**
 * Disorder law `V(x)` and coupling `g`; `width` is the Cauchy scale or the
 * Gaussian standard deviation.
 */
typedef struct MsalabDisorder {
  enum MsalabLaw law;
  double width;
  double g;
  uint64_t seed;
} MsalabDisorder;

/**
 * Interaction `U(x1 - x2)`, constant on `0 <= x1 - x2 <= d`.
 */
typedef struct MsalabInteraction {
  uint32_t d;
  double strength;
  enum MsalabStatistics statistics;
} MsalabInteraction;

typedef struct MsalabProbEstimate {
  double p_hat;
  double ci_low;
  double ci_high;
  double bound_value;
  uint64_t n;
  uint64_t successes;
  enum MsalabBoundStatus status;
} MsalabProbEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *msalab_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *msalab_last_error(void);

/**
 * Single-particle operator on `[a, b]` for disorder replicate `replicate`.
 *
 * # Safety
 * `disorder` must point to a valid `MsalabDisorder` and `out` to writable
 * storage for a handle pointer.
 */
enum MsalabStatus msalab_h1_build(const struct MsalabDisorder *disorder,
                                  int64_t a,
                                  int64_t b,
                                  uint64_t replicate,
                                  struct MsalabHamiltonian **out);

/**
 * Interacting two-particle operator on the clipped square of radius
 * `radius` around `(c1, c2)`.
 *
 * # Safety
 * `disorder` and `interaction` must point to valid structs and `out` to
 * writable storage for a handle pointer.
 */
enum MsalabStatus msalab_h2_build(const struct MsalabDisorder *disorder,
                                  const struct MsalabInteraction *interaction,
                                  int64_t c1,
                                  int64_t c2,
                                  int64_t radius,
                                  uint64_t replicate,
                                  struct MsalabHamiltonian **out);

/**
 * # Safety
 * `h` must be NULL or a handle from a build function, not yet freed.
 */
void msalab_hamiltonian_free(struct MsalabHamiltonian *h);

/**
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum MsalabStatus msalab_hamiltonian_dim(const struct MsalabHamiltonian *h, size_t *out);

/**
 * Copies the matrix in row-major order into `buf`, which must hold
 * `dim * dim` values.
 *
 * # Safety
 * `h` must be a live handle and `buf` must be writable for `len` doubles.
 */
enum MsalabStatus msalab_hamiltonian_entries(const struct MsalabHamiltonian *h,
                                             double *buf,
                                             size_t len);

/**
 * Basis index of the one-particle site `x`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum MsalabStatus msalab_hamiltonian_index_1p(const struct MsalabHamiltonian *h,
                                              int64_t x,
                                              size_t *out);

/**
 * Basis index of the two-particle site `(x1, x2)`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum MsalabStatus msalab_hamiltonian_index_2p(const struct MsalabHamiltonian *h,
                                              int64_t x1,
                                              int64_t x2,
                                              size_t *out);

/**
 * Diagonalizes `h`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum MsalabStatus msalab_spectrum_new(const struct MsalabHamiltonian *h,
                                      struct MsalabSpectrum **out);

/**
 * # Safety
 * `s` must be NULL or a handle from `msalab_spectrum_new`, not yet freed.
 */
void msalab_spectrum_free(struct MsalabSpectrum *s);

/**
 * Copies the ascending eigenvalues into `buf`.
 *
 * # Safety
 * `s` must be a live handle and `buf` writable for `len` doubles.
 */
enum MsalabStatus msalab_spectrum_eigenvalues(const struct MsalabSpectrum *s,
                                              double *buf,
                                              size_t len);

/**
 * Distance from `e` to the spectrum.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum MsalabStatus msalab_spectral_dist(const struct MsalabSpectrum *s, double e, double *out);

/**
 * `G(y, u; E) = <δ_y, (H - E)^{-1} δ_u>` between basis indices `iy`, `iu`.
 * Fails with `ResonantEnergy` when `E` is numerically on the spectrum.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum MsalabStatus msalab_green(const struct MsalabSpectrum *s,
                               size_t iy,
                               size_t iu,
                               double e,
                               double *out);

/**
 * Scale schedule from `l0`, `m0` with growth `alpha` and resonance exponent
 * `beta`. Writes up to `cap` lengths and masses, the number written to
 * `count` and the mass product to `product`.
 *
 * # Safety
 * `lengths` and `masses` must be writable for `cap` values; `count` and
 * `product` must be writable.
 */
enum MsalabStatus msalab_schedule(uint64_t l0,
                                  double m0,
                                  double alpha,
                                  double beta,
                                  size_t k_max,
                                  uint64_t *lengths,
                                  double *masses,
                                  size_t cap,
                                  size_t *count,
                                  double *product);

/**
 * Monte Carlo estimate of `P{dist(E, σ(H)) < r}` for the two-particle
 * square of radius `radius` around `(c1, c2)`.
 *
 * # Safety
 * `disorder` and `interaction` must point to valid structs and `out` must
 * be writable.
 */
enum MsalabStatus msalab_wegner_mc(const struct MsalabDisorder *disorder,
                                   const struct MsalabInteraction *interaction,
                                   int64_t c1,
                                   int64_t c2,
                                   int64_t radius,
                                   double e,
                                   double r,
                                   uint64_t n,
                                   struct MsalabProbEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSALAB_H */
