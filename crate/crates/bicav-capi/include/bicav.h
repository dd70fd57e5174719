#ifndef BICAV_H
#define BICAV_H

/* Generated from the Rust sources by the crate build script; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Anything but `Ok` leaves a message readable through
// `bicav_last_error`.
typedef enum {
  BICAV_STATUS_OK = 0,
  // A required pointer argument was null.
  BICAV_STATUS_NULL_POINTER = 1,
  // The call itself was malformed (bad flag value, inverted pair, ...).
  BICAV_STATUS_INVALID_ARGUMENT = 2,
  // A parameter lies outside the domain of the requested quantity.
  BICAV_STATUS_DOMAIN = 3,
  // The parameter combination is rejected by the model (e.g. unequal
  // per-cavity decay rates where a common value is required).
  BICAV_STATUS_UNSUPPORTED = 4,
  // No real, non-negative solution exists.
  BICAV_STATUS_NO_SOLUTION = 5,
  // The integrated trajectory diverged.
  BICAV_STATUS_DIVERGED = 6,
  // The rate separation is too stiff for the explicit integrator.
  BICAV_STATUS_TOO_STIFF = 7,
  // The settling budget elapsed before a fixed point was certified.
  BICAV_STATUS_NOT_SETTLED = 8,
  // An internal step or sample budget ran out.
  BICAV_STATUS_BUDGET_EXHAUSTED = 9,
  // Filesystem failure.
  BICAV_STATUS_IO = 10,
  // A panic was caught at the boundary.
  BICAV_STATUS_PANIC = 11,
} BicavStatus;

// Steady-state location relative to the fold structure of a coupling pair.
typedef enum {
  // Same root counts, no enhancement.
  BICAV_REGION_NONE = 0,
  // Same root counts with enhancement.
  BICAV_REGION_I = 1,
  // Root counts differ between the two couplings.
  BICAV_REGION_II = 2,
} BicavRegion;

// Opaque parameter handle.
typedef struct BicavParams BicavParams;

// One complex number; `re + i im`.
typedef struct {
  double re;
  double im;
} BicavComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bicav_version(void);

// Copies the message of the most recent failure on this thread into `buf`
// (truncated, always NUL-terminated when `cap > 0`) and returns the size
// in bytes the full message needs, terminator included. Call with a null
// `buf` to size a buffer. Successful calls clear the message.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be null.
size_t bicav_last_error(char *buf, size_t cap);

// Validates the parameter set and, on success, stores a new handle in
// `*out`. All rates are angular frequencies in rad/s; `p_in` is in watts
// and `lambda_d` in metres. Free the handle with `bicav_params_free`.
//
// # Safety
// `out` must point to writable storage for one pointer.
BicavStatus bicav_params_new(double gamma,
                             double kappa1,
                             double kappa2,
                             double delta,
                             double phi,
                             double omega_m,
                             double gamma_m,
                             double g,
                             double p_in,
                             double lambda_d,
                             BicavParams **out);

// Releases a handle. A null handle is a no-op.
//
// # Safety
// `h` must be a pointer returned by `bicav_params_new` that has not been
// freed, or null.
void bicav_params_free(BicavParams *h);

// Replaces the detuning and coupling phase of an existing handle, keeping
// everything else. On rejection the handle is left unchanged.
//
// # Safety
// `h` must be a live handle from `bicav_params_new`.
BicavStatus bicav_params_set_operating_point(BicavParams *h, double delta, double phi);

// Eigenvalue pair of the waveguide-mediated two-cavity matrix at the
// handle's operating point, ordered by the splitting convention (the
// `plus` branch carries the `+√(δ²−Γ²e^{2iφ})/2` term).
//
// # Safety
// `h` must be a live handle; `lambda_plus` and `lambda_minus` must each
// point to writable storage for one `BicavComplex`.
BicavStatus bicav_eigenvalues(const BicavParams *h,
                              BicavComplex *lambda_plus,
                              BicavComplex *lambda_minus);

// Steady-state mechanical intensities β = |b|² at the handle's operating
// point, ascending, with per-root stability verdicts from the slope rule.
// Writes at most three entries into `betas` and `stable` and the actual
// count (1, 2 or 3) into `count`.
//
// # Safety
// `h` must be a live handle; `betas` and `stable` must point to arrays of
// at least three elements; `count` must be writable.
BicavStatus bicav_steady_states(const BicavParams *h, double *betas, bool *stable, size_t *count);

// Two-coupling readout at the handle's operating point: η is the ratio of
// the occupied-branch β at coupling `g1` to the one at `g2 > g1`, and the
// region classifies the fold structure (`II` when exactly one of the two
// couplings is bistable there).
//
// # Safety
// `h` must be a live handle; `eta` and `region` must be writable.
BicavStatus bicav_sensitivity(const BicavParams *h,
                              double g1,
                              double g2,
                              double *eta,
                              BicavRegion *region);

// Integrates the mean-field equations from vacuum until a fixed point is
// certified and writes its β. Pass `settle_tol <= 0` or
// `max_periods <= 0` to use the library defaults.
//
// # Safety
// `h` must be a live handle; `beta` must be writable.
BicavStatus bicav_settle_from_vacuum(const BicavParams *h,
                                     double settle_tol,
                                     double max_periods,
                                     double *beta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BICAV_H */
