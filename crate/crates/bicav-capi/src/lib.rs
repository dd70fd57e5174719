//! C interface for the bicav library.
//!
//! Conventions: results travel through out-pointers and every entry point
//! returns a [`BicavStatus`]. The parameter set lives behind an opaque
//! handle created by `bicav_params_new` and released by `bicav_params_free`.
//! On failure a thread-local message describes the cause; fetch it with
//! `bicav_last_error`. Panics never cross the boundary: they are caught and
//! reported as `Panic` status.
//!
//! The build script renders this interface to `include/bicav.h`.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use bicav::dynamics::{settle_with, IntegratorOptions, MeanFieldState};
use bicav::error::Error;
use bicav::params::PhysicalParams;
use bicav::sensing;
use bicav::spectrum::eigenvalues_closed_form;
use bicav::steadystate::solve_intensity;

/// Outcome of a call. Anything but `Ok` leaves a message readable through
/// `bicav_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicavStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// The call itself was malformed (bad flag value, inverted pair, ...).
    InvalidArgument = 2,
    /// A parameter lies outside the domain of the requested quantity.
    Domain = 3,
    /// The parameter combination is rejected by the model (e.g. unequal
    /// per-cavity decay rates where a common value is required).
    Unsupported = 4,
    /// No real, non-negative solution exists.
    NoSolution = 5,
    /// The integrated trajectory diverged.
    Diverged = 6,
    /// The rate separation is too stiff for the explicit integrator.
    TooStiff = 7,
    /// The settling budget elapsed before a fixed point was certified.
    NotSettled = 8,
    /// An internal step or sample budget ran out.
    BudgetExhausted = 9,
    /// Filesystem failure.
    Io = 10,
    /// A panic was caught at the boundary.
    Panic = 11,
}

/// Steady-state location relative to the fold structure of a coupling pair.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicavRegion {
    /// Same root counts, no enhancement.
    None = 0,
    /// Same root counts with enhancement.
    I = 1,
    /// Root counts differ between the two couplings.
    II = 2,
}

/// One complex number; `re + i im`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicavComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque parameter handle.
pub struct BicavParams(PhysicalParams);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut v = e.borrow_mut();
        v.clear();
        // Interior NUL would truncate the C string; none are expected, but
        // strip defensively.
        v.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn clear_error() {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
}

fn status_of(e: &Error) -> BicavStatus {
    match e {
        Error::Domain(_) => BicavStatus::Domain,
        Error::Unsupported(_) => BicavStatus::Unsupported,
        Error::NoSolution(_) | Error::UndefinedBandwidth(_) => BicavStatus::NoSolution,
        Error::Diverged { .. } => BicavStatus::Diverged,
        Error::StepUnderflow { .. } => BicavStatus::TooStiff,
        Error::NotSettled { .. } => BicavStatus::NotSettled,
        Error::ExceededStepBudget { .. } => BicavStatus::BudgetExhausted,
        Error::SweepStep { source, .. } => status_of(source),
        Error::Usage(_) | Error::Config(_) => BicavStatus::InvalidArgument,
        Error::Io(_) => BicavStatus::Io,
    }
}

fn fail(e: &Error) -> BicavStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn guarded<F: FnOnce() -> BicavStatus>(f: F) -> BicavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let text = p
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "opaque payload".into());
            set_error(&format!("internal panic: {text}"));
            BicavStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($p:expr) => {
        if $p.is_null() {
            set_error(concat!(stringify!($p), " is null"));
            return BicavStatus::NullPointer;
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bicav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the message of the most recent failure on this thread into `buf`
/// (truncated, always NUL-terminated when `cap > 0`) and returns the size
/// in bytes the full message needs, terminator included. Call with a null
/// `buf` to size a buffer. Successful calls clear the message.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn bicav_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let v = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = v.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(v.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        v.len() + 1
    })
}

/// Validates the parameter set and, on success, stores a new handle in
/// `*out`. All rates are angular frequencies in rad/s; `p_in` is in watts
/// and `lambda_d` in metres. Free the handle with `bicav_params_free`.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bicav_params_new(
    gamma: f64,
    kappa1: f64,
    kappa2: f64,
    delta: f64,
    phi: f64,
    omega_m: f64,
    gamma_m: f64,
    g: f64,
    p_in: f64,
    lambda_d: f64,
    out: *mut *mut BicavParams,
) -> BicavStatus {
    guarded(|| {
        nonnull!(out);
        let p = PhysicalParams {
            gamma,
            kappa1,
            kappa2,
            delta,
            phi,
            omega_m,
            gamma_m,
            g,
            p_in,
            lambda_d,
        };
        match p.validate() {
            Ok(()) => {
                clear_error();
                unsafe { *out = Box::into_raw(Box::new(BicavParams(p))) };
                BicavStatus::Ok
            }
            Err(e) => {
                unsafe { *out = std::ptr::null_mut() };
                fail(&e)
            }
        }
    })
}

/// Releases a handle. A null handle is a no-op.
///
/// # Safety
/// `h` must be a pointer returned by `bicav_params_new` that has not been
/// freed, or null.
#[no_mangle]
pub unsafe extern "C" fn bicav_params_free(h: *mut BicavParams) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Replaces the detuning and coupling phase of an existing handle, keeping
/// everything else. On rejection the handle is left unchanged.
///
/// # Safety
/// `h` must be a live handle from `bicav_params_new`.
#[no_mangle]
pub unsafe extern "C" fn bicav_params_set_operating_point(
    h: *mut BicavParams,
    delta: f64,
    phi: f64,
) -> BicavStatus {
    guarded(|| {
        nonnull!(h);
        let params = unsafe { &mut (*h).0 };
        let candidate = PhysicalParams {
            delta,
            phi,
            ..*params
        };
        match candidate.validate() {
            Ok(()) => {
                clear_error();
                *params = candidate;
                BicavStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Eigenvalue pair of the waveguide-mediated two-cavity matrix at the
/// handle's operating point, ordered by the splitting convention (the
/// `plus` branch carries the `+√(δ²−Γ²e^{2iφ})/2` term).
///
/// # Safety
/// `h` must be a live handle; `lambda_plus` and `lambda_minus` must each
/// point to writable storage for one `BicavComplex`.
#[no_mangle]
pub unsafe extern "C" fn bicav_eigenvalues(
    h: *const BicavParams,
    lambda_plus: *mut BicavComplex,
    lambda_minus: *mut BicavComplex,
) -> BicavStatus {
    guarded(|| {
        nonnull!(h);
        nonnull!(lambda_plus);
        nonnull!(lambda_minus);
        let p = unsafe { &(*h).0 };
        let kappa = match p.kappa() {
            Ok(k) => k,
            Err(e) => return fail(&e),
        };
        match eigenvalues_closed_form(p.delta, kappa, p.gamma, p.phi) {
            Ok(s) => {
                clear_error();
                unsafe {
                    *lambda_plus = BicavComplex {
                        re: s.lambda_plus.re,
                        im: s.lambda_plus.im,
                    };
                    *lambda_minus = BicavComplex {
                        re: s.lambda_minus.re,
                        im: s.lambda_minus.im,
                    };
                }
                BicavStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Steady-state mechanical intensities β = |b|² at the handle's operating
/// point, ascending, with per-root stability verdicts from the slope rule.
/// Writes at most three entries into `betas` and `stable` and the actual
/// count (1, 2 or 3) into `count`.
///
/// # Safety
/// `h` must be a live handle; `betas` and `stable` must point to arrays of
/// at least three elements; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bicav_steady_states(
    h: *const BicavParams,
    betas: *mut f64,
    stable: *mut bool,
    count: *mut usize,
) -> BicavStatus {
    guarded(|| {
        nonnull!(h);
        nonnull!(betas);
        nonnull!(stable);
        nonnull!(count);
        let p = unsafe { &(*h).0 };
        match solve_intensity(p) {
            Ok(states) => {
                clear_error();
                unsafe {
                    for (i, s) in states.iter().take(3).enumerate() {
                        *betas.add(i) = s.beta;
                        *stable.add(i) = s.stable;
                    }
                    *count = states.len().min(3);
                }
                BicavStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Two-coupling readout at the handle's operating point: η is the ratio of
/// the occupied-branch β at coupling `g1` to the one at `g2 > g1`, and the
/// region classifies the fold structure (`II` when exactly one of the two
/// couplings is bistable there).
///
/// # Safety
/// `h` must be a live handle; `eta` and `region` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bicav_sensitivity(
    h: *const BicavParams,
    g1: f64,
    g2: f64,
    eta: *mut f64,
    region: *mut BicavRegion,
) -> BicavStatus {
    guarded(|| {
        nonnull!(h);
        nonnull!(eta);
        nonnull!(region);
        let p = unsafe { &(*h).0 };
        match sensing::sensitivity(p, g1, g2) {
            Ok(s) => {
                clear_error();
                unsafe {
                    *eta = s.eta;
                    *region = match s.region {
                        sensing::Region::None => BicavRegion::None,
                        sensing::Region::I => BicavRegion::I,
                        sensing::Region::II => BicavRegion::II,
                    };
                }
                BicavStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Integrates the mean-field equations from vacuum until a fixed point is
/// certified and writes its β. Pass `settle_tol <= 0` or
/// `max_periods <= 0` to use the library defaults.
///
/// # Safety
/// `h` must be a live handle; `beta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bicav_settle_from_vacuum(
    h: *const BicavParams,
    settle_tol: f64,
    max_periods: f64,
    beta: *mut f64,
) -> BicavStatus {
    guarded(|| {
        nonnull!(h);
        nonnull!(beta);
        let p = unsafe { &(*h).0 };
        let defaults = IntegratorOptions::default();
        let opts = IntegratorOptions {
            settle_tol: if settle_tol > 0.0 {
                settle_tol
            } else {
                defaults.settle_tol
            },
            settle_max_periods: if max_periods > 0.0 {
                max_periods
            } else {
                defaults.settle_max_periods
            },
            ..defaults
        };
        match settle_with(&MeanFieldState::ZERO, p, &opts) {
            Ok(out) => {
                clear_error();
                unsafe { *beta = out.state.beta() };
                BicavStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
