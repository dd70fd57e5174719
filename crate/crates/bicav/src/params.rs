//! Dimensional system parameters, unit conversions, drive intensity,
//! nondimensionalization, and the levitated-nanosphere coupling calculator.
//!
//! Everything downstream consumes either [`PhysicalParams`] (rates in rad/s)
//! or its scaled form [`ReducedParams`] (everything divided by the
//! waveguide-induced rate Γ). The reduced set is the canonical working
//! representation for the steady-state and sensing code paths; dynamics needs
//! the dimensional set because time enters explicitly.

use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Dimensional parameters of one experiment. All rates are angular
/// frequencies (rad/s); `p_in` is in watts and `lambda_d` in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Waveguide-induced rate Γ.
    pub gamma: f64,
    /// Decay rate of cavity 1, κ₁.
    pub kappa1: f64,
    /// Decay rate of cavity 2, κ₂. The model requires κ₁ = κ₂.
    pub kappa2: f64,
    /// Cavity detuning δ; the two cavities sit at ∓δ/2.
    pub delta: f64,
    /// Propagation-phase deviation φ (rad), with the full phase Φ = 2nπ + φ.
    /// Canonical branch |φ| < π.
    pub phi: f64,
    /// Mechanical frequency ω_m.
    pub omega_m: f64,
    /// Mechanical damping γ_m. The steady state is independent of it; it only
    /// sets the dynamical relaxation time.
    pub gamma_m: f64,
    /// Single-photon optomechanical coupling g ≥ 0.
    pub g: f64,
    /// Input laser power (W).
    pub p_in: f64,
    /// Drive wavelength (m).
    pub lambda_d: f64,
}

impl Default for PhysicalParams {
    /// Committed demo operating point: Γ/2π = 100 MHz, κ/2π = 200 kHz,
    /// δ = φ = 0, ω_m/2π = 10 kHz, γ_m = 10⁻²ω_m, g/2π = 1 Hz,
    /// P_in = 8.06 mW, λ_d = 1550 nm. Same rates as `configs/example.toml`,
    /// which instead sits at φ = −0.008π with critically damped mechanics.
    fn default() -> Self {
        let omega_m = TAU * 1.0e4;
        Self {
            gamma: TAU * 1.0e8,
            kappa1: TAU * 2.0e5,
            kappa2: TAU * 2.0e5,
            delta: 0.0,
            phi: 0.0,
            omega_m,
            gamma_m: 1.0e-2 * omega_m,
            g: TAU * 1.0,
            p_in: 8.06e-3,
            lambda_d: 1.55e-6,
        }
    }
}

impl PhysicalParams {
    /// Checks the type invariants; every consumer calls this first.
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be finite, got {v}")))
            }
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("delta", self.delta),
            ("phi", self.phi),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("g", self.g),
            ("p_in", self.p_in),
            ("lambda_d", self.lambda_d),
        ] {
            finite(name, v)?;
        }
        if self.gamma <= 0.0 {
            return Err(Error::Domain(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 {
            return Err(Error::Domain("cavity decay rates must be >= 0".into()));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::Domain(format!(
                "omega_m must be > 0, got {}",
                self.omega_m
            )));
        }
        if self.gamma_m < 0.0 {
            return Err(Error::Domain("gamma_m must be >= 0".into()));
        }
        if self.g < 0.0 {
            return Err(Error::Domain("g must be >= 0".into()));
        }
        if self.p_in < 0.0 {
            return Err(Error::Domain("p_in must be >= 0".into()));
        }
        if self.lambda_d <= 0.0 {
            return Err(Error::Domain("lambda_d must be > 0".into()));
        }
        if self.phi.abs() >= PI {
            return Err(Error::Domain(format!(
                "phi must satisfy |phi| < pi (canonical branch), got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Common decay rate κ. Unequal κ₁, κ₂ are rejected rather than silently
    /// averaged: the effective two-mode model assumes identical decay.
    pub fn kappa(&self) -> Result<f64> {
        let scale = self.kappa1.abs().max(self.kappa2.abs());
        if (self.kappa1 - self.kappa2).abs() > 1e-12 * scale {
            return Err(Error::Unsupported(format!(
                "kappa1 != kappa2 ({} vs {}); the model assumes identical cavity decay",
                self.kappa1, self.kappa2
            )));
        }
        Ok(self.kappa1)
    }

    /// Drive angular frequency ω_d = 2πc/λ_d.
    pub fn omega_d(&self) -> Result<f64> {
        wavelength_to_angular_frequency(self.lambda_d)
    }

    /// Drive intensity I = Ω² = P_in·κ₁/(ℏω_d). Zero power or κ₁ = 0 gives
    /// zero drive.
    pub fn drive(&self) -> Result<f64> {
        drive_intensity(self.p_in, self.kappa1, self.omega_d()?)
    }

    /// Kerr coefficient χ = g²/ω_m.
    pub fn chi(&self) -> Result<f64> {
        kerr_coefficient(self.g, self.omega_m)
    }

    /// Scales everything by Γ. See [`reduce`].
    pub fn reduce(&self) -> Result<ReducedParams> {
        reduce(self)
    }
}

/// Dimensionless parameter set scaled by Γ; the canonical internal
/// representation for the intensity response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedParams {
    /// δ/Γ.
    pub d: f64,
    /// κ/Γ.
    pub k: f64,
    /// φ (rad; already dimensionless).
    pub phi: f64,
    /// χ/Γ.
    pub chi_t: f64,
    /// Iχ/Γ³, the dimensionless drive.
    pub drive_t: f64,
}

impl ReducedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.phi.is_finite()) {
            return Err(Error::Domain("d and phi must be finite".into()));
        }
        if !(self.k >= 0.0) {
            return Err(Error::Domain(format!("k must be >= 0, got {}", self.k)));
        }
        if !(self.chi_t >= 0.0) {
            return Err(Error::Domain(format!(
                "chi_t must be >= 0, got {}",
                self.chi_t
            )));
        }
        if !(self.drive_t >= 0.0) {
            return Err(Error::Domain(format!(
                "drive_t must be >= 0, got {}",
                self.drive_t
            )));
        }
        Ok(())
    }
}

/// Parameters of the levitated-nanosphere coupling estimate: N quantum
/// emitters in the evanescent field of a cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NanosphereParams {
    /// Emitter count.
    pub n: u64,
    /// Steady excited-state population, 0 ≤ p_e ≤ 1.
    pub p_e: f64,
    /// Emitter-cavity coupling at the sphere's position, Ω_c(z) (rad/s).
    pub omega_c: f64,
    /// Emitter-cavity detuning Δ_c (rad/s), nonzero.
    pub delta_c: f64,
    /// Evanescent-field decay constant γ_c (1/m).
    pub gamma_c: f64,
    /// Mechanical zero-point motion q_zpf (m).
    pub q_zpf: f64,
}

impl NanosphereParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Domain("emitter count n must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_e) {
            return Err(Error::Domain(format!(
                "p_e must be in [0, 1], got {}",
                self.p_e
            )));
        }
        if self.delta_c == 0.0 {
            return Err(Error::Domain("delta_c must be nonzero".into()));
        }
        if !(self.omega_c.is_finite() && self.delta_c.is_finite()) {
            return Err(Error::Domain("omega_c and delta_c must be finite".into()));
        }
        Ok(())
    }
}

/// Drive intensity I = Ω² = P_in·κ₁/(ℏω_d), in s⁻².
///
/// I scales linearly in both P_in and κ₁ and inversely in ω_d. Zero power or
/// zero input-coupler rate yields zero intensity; negative inputs and
/// non-positive ω_d are domain errors.
pub fn drive_intensity(p_in: f64, kappa1: f64, omega_d: f64) -> Result<f64> {
    if p_in < 0.0 {
        return Err(Error::Domain(format!("p_in must be >= 0, got {p_in}")));
    }
    if kappa1 < 0.0 {
        return Err(Error::Domain(format!("kappa1 must be >= 0, got {kappa1}")));
    }
    if omega_d <= 0.0 {
        return Err(Error::Domain(format!("omega_d must be > 0, got {omega_d}")));
    }
    Ok(p_in * kappa1 / (HBAR * omega_d))
}

/// Kerr coefficient χ = g²/ω_m (rad/s), from adiabatic elimination of the
/// mechanical mode.
pub fn kerr_coefficient(g: f64, omega_m: f64) -> Result<f64> {
    if omega_m <= 0.0 {
        return Err(Error::Domain(format!("omega_m must be > 0, got {omega_m}")));
    }
    if g < 0.0 {
        return Err(Error::Domain(format!("g must be >= 0, got {g}")));
    }
    Ok(g * g / omega_m)
}

/// Angular frequency ω = 2πc/λ of light of wavelength λ.
pub fn wavelength_to_angular_frequency(lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "wavelength must be > 0, got {lambda}"
        )));
    }
    Ok(TAU * SPEED_OF_LIGHT / lambda)
}

/// Signed collective single-photon coupling of N emitters in an evanescent
/// field: g = −√2·N·(2p_e − 1)·Ω_c²/(2Δ_c)·γ_c·q_zpf. Callers take |g| when
/// forming χ.
pub fn nanosphere_coupling(p: &NanosphereParams) -> Result<f64> {
    p.validate()?;
    Ok(
        -std::f64::consts::SQRT_2 * (p.n as f64) * (2.0 * p.p_e - 1.0) * p.omega_c.powi(2)
            / (2.0 * p.delta_c)
            * p.gamma_c
            * p.q_zpf,
    )
}

/// Nondimensionalizes by Γ.
///
/// The dimensionless drive is normalized by the Kerr coefficient
/// (drive_t = Iχ/Γ³), so a driven configuration with g = 0 has no reduced
/// form and is rejected; solve the linear response from the dimensional
/// coefficients instead.
pub fn reduce(p: &PhysicalParams) -> Result<ReducedParams> {
    p.validate()?;
    let kappa = p.kappa()?;
    let chi = p.chi()?;
    let drive = p.drive()?;
    if chi == 0.0 && drive > 0.0 {
        return Err(Error::Unsupported(
            "the dimensionless drive is normalized by the Kerr coefficient; \
             g = 0 with nonzero drive has no reduced form"
                .into(),
        ));
    }
    Ok(ReducedParams {
        d: p.delta / p.gamma,
        k: kappa / p.gamma,
        phi: p.phi,
        chi_t: chi / p.gamma,
        drive_t: drive * chi / p.gamma.powi(3),
    })
}

/// Rebuilds a dimensional parameter set from a reduced one, given the three
/// scales the reduction forgets: Γ, ω_m, and the drive wavelength.
///
/// Inverts [`reduce`] exactly: g = √(χω_m) with χ = chi_t·Γ, and P_in is
/// chosen so that P_in·κ₁/(ℏω_d) reproduces the drive intensity. γ_m defaults
/// to 10⁻²·ω_m.
pub fn inflate(
    r: &ReducedParams,
    gamma: f64,
    omega_m: f64,
    lambda_d: f64,
) -> Result<PhysicalParams> {
    r.validate()?;
    if gamma <= 0.0 || omega_m <= 0.0 {
        return Err(Error::Domain("gamma and omega_m must be > 0".into()));
    }
    let chi = r.chi_t * gamma;
    let drive = if r.drive_t == 0.0 {
        0.0
    } else if chi == 0.0 {
        return Err(Error::Unsupported(
            "drive_t > 0 with chi_t = 0 cannot be realized".into(),
        ));
    } else {
        r.drive_t * gamma.powi(3) / chi
    };
    let kappa1 = r.k * gamma;
    let omega_d = wavelength_to_angular_frequency(lambda_d)?;
    let p_in = if drive == 0.0 {
        0.0
    } else if kappa1 == 0.0 {
        return Err(Error::Unsupported(
            "nonzero drive with kappa1 = 0 cannot be realized from input power".into(),
        ));
    } else {
        drive * HBAR * omega_d / kappa1
    };
    let p = PhysicalParams {
        gamma,
        kappa1,
        kappa2: kappa1,
        delta: r.d * gamma,
        phi: r.phi,
        omega_m,
        gamma_m: 1.0e-2 * omega_m,
        g: (chi * omega_m).sqrt(),
        p_in,
        lambda_d,
    };
    p.validate()?;
    Ok(p)
}
