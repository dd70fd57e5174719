//! Simulation library for a pair of optical cavities coupled through a common
//! waveguide, each containing a weak optomechanical Kerr nonlinearity.
//!
//! The model is a two-mode non-Hermitian system: the waveguide mediates both a
//! coherent coupling of amplitude (Γ/2)·sinΦ and a dissipative coupling of
//! amplitude (Γ/2)·cosΦ between the cavities, where Γ is the waveguide-induced
//! rate and Φ = 2nπ + φ is the propagation phase. At φ = 0 and equal cavity
//! detunings ±δ/2 the effective 2×2 matrix is anti-PT symmetric and its
//! eigenvalues coalesce at the exceptional points |δ| = Γ. A mechanical mode
//! (frequency ω_m) coupled to cavity 1 with single-photon strength g produces,
//! after adiabatic elimination, a Kerr coefficient χ = g²/ω_m that makes the
//! driven steady state obey a cubic intensity relation with an optically
//! bistable window. The ratio of upper-branch intensities for two candidate
//! couplings, η = β(g₁)/β(g₂), serves as a figure of merit for detecting which
//! nonlinearity is present.
//!
//! # Modules
//!
//! - [`params`]: dimensional inputs, unit conversions, drive intensity,
//!   nondimensionalization, and the levitated-nanosphere coupling formula.
//! - [`spectrum`]: the effective non-Hermitian 2×2 matrix, its eigenvalues in
//!   closed form and via a numeric oracle, exceptional-point location, and the
//!   small-φ linewidth-suppression approximation.
//! - [`steadystate`]: cubic coefficients A and B, robust root solving on the
//!   nondimensionalized cubic, root stability, fold turning points, and
//!   bistability region maps.
//! - [`dynamics`]: mean-field equations of motion, an adaptive
//!   Dormand–Prince 5(4) integrator, fixed-point settling, the analytic 6×6
//!   Jacobian, linear stability, and quasi-static hysteresis sweeps.
//! - [`sensing`]: the sensitivity figures η and η⁻¹, operating-region
//!   classification, detection bandwidth, and optimal detuning.
//! - [`cli`]: config parsing and the deterministic CSV/JSON emitters behind
//!   the `bicav` binary.
//!
//! # Conventions
//!
//! All rates are angular frequencies in rad/s; the CLI layer accepts Hz and
//! converts with an explicit 2π. β ≡ |α₁|² is the intracavity photon number of
//! cavity 1 and is dimensionless on every code path. The drive intensity is
//! I = Ω² = P_in·κ₁/(ℏω_d). Internally the cubic is solved in the scaled
//! variable x = χβ/Γ, which keeps all coefficients within a few orders of
//! magnitude of unity; [`params::ReducedParams`] carries the matching
//! dimensionless parameter set (δ/Γ, κ/Γ, φ, χ/Γ, Iχ/Γ³).
//!
//! # Example
//!
//! ```
//! use bicav::params::PhysicalParams;
//! use bicav::steadystate;
//!
//! let p = PhysicalParams::default(); // committed demo operating point
//! let states = steadystate::solve_intensity(&p).unwrap();
//! assert_eq!(states.len(), 1);
//! assert!((states[0].beta - 5.6225e9).abs() / 5.6225e9 < 1e-3);
//! ```

// Validation deliberately writes `!(x > 0.0)` and friends: the negated form
// also rejects NaN, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod params;
pub mod sensing;
pub mod spectrum;
pub mod steadystate;

pub use error::{Error, Result};
pub use params::{NanosphereParams, PhysicalParams, ReducedParams};
pub use spectrum::{EffectiveMatrix, Spectrum};
pub use steadystate::{Branch, CubicCoefficients, SteadyState};
