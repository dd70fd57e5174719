//! Steady-state intensity response of the driven cavity pair.
//!
//! Adiabatic elimination of the mechanical mode turns the optomechanical
//! coupling into an intensity-dependent (Kerr) frequency pull χβ with
//! χ = g²/ω_m, and the intracavity photon number β = |α₁|² then obeys the
//! cubic
//!
//! ```text
//! χ²β³ + χAβ² + Bβ = I,
//! ```
//!
//! whose coefficients A and B depend only on (δ, κ, Γ, Φ). When A < 0 and
//! A² > 3B the response folds over and up to three positive roots coexist:
//! two stable branches separated by an unstable one (optical bistability).
//! The solver works on the dimensionless form x³ + ax² + bx = t with
//! x = χβ/Γ, a = A/Γ, b = B/Γ², t = Iχ/Γ³, because the raw coefficients
//! span tens of orders of magnitude.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridResult};
use crate::params::{PhysicalParams, ReducedParams};

/// Coefficients of the steady-state cubic χ²β³ + χAβ² + Bβ = I, together
/// with the scale Γ used for nondimensionalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoefficients {
    /// Quadratic coefficient A (rad/s). Negative A is necessary for
    /// bistability.
    pub a: f64,
    /// Linear coefficient B ((rad/s)²); never negative.
    pub b: f64,
    /// Kerr coefficient χ = g²/ω_m (rad/s).
    pub chi: f64,
    /// Drive intensity I = Ω² (s⁻²).
    pub drive: f64,
    /// Scale Γ (rad/s) for the dimensionless form.
    pub gamma: f64,
}

impl CubicCoefficients {
    /// Closed-form coefficients. With M = δ² + (κ+Γ)²:
    /// A = δ + Γ²[−δ·cos2Φ + (κ+Γ)·sin2Φ]/M and
    /// B = |M − Γ²e^{2iΦ}|²/(4M), the latter algebraically equal to
    /// M/4 + Γ⁴/(4M) − (Γ²/2)cos2Φ but free of the cancellation that form
    /// suffers near M ≈ Γ².
    pub fn from_rates(
        delta: f64,
        kappa: f64,
        gamma: f64,
        phi: f64,
        chi: f64,
        drive: f64,
    ) -> Result<Self> {
        if !(delta.is_finite() && kappa.is_finite() && gamma.is_finite() && phi.is_finite()) {
            return Err(Error::Domain("rates must be finite".into()));
        }
        if gamma <= 0.0 {
            return Err(Error::Domain(format!("gamma must be > 0, got {gamma}")));
        }
        if kappa < 0.0 {
            return Err(Error::Domain(format!("kappa must be >= 0, got {kappa}")));
        }
        if !(chi >= 0.0) {
            return Err(Error::Domain(format!("chi must be >= 0, got {chi}")));
        }
        if !(drive >= 0.0) {
            return Err(Error::Domain(format!("drive must be >= 0, got {drive}")));
        }
        let loss = kappa + gamma;
        let m = delta * delta + loss * loss;
        let (s2, c2) = (2.0 * phi).sin_cos();
        let g2 = gamma * gamma;
        let a = delta + g2 * (-delta * c2 + loss * s2) / m;
        let re = m - g2 * c2;
        let im = g2 * s2;
        let b = (re * re + im * im) / (4.0 * m);
        Ok(Self {
            a,
            b,
            chi,
            drive,
            gamma,
        })
    }

    /// Coefficients for a dimensional parameter set.
    pub fn from_params(p: &PhysicalParams) -> Result<Self> {
        p.validate()?;
        Self::from_rates(p.delta, p.kappa()?, p.gamma, p.phi, p.chi()?, p.drive()?)
    }

    /// Coefficients for a reduced parameter set, in units of Γ = 1.
    pub fn from_reduced(r: &ReducedParams) -> Result<Self> {
        r.validate()?;
        let drive = if r.drive_t == 0.0 {
            0.0
        } else {
            r.drive_t / r.chi_t
        };
        Self::from_rates(r.d, r.k, 1.0, r.phi, r.chi_t, drive)
    }

    /// Left side minus right side of the cubic at β.
    pub fn residual(&self, beta: f64) -> f64 {
        self.chi * self.chi * beta.powi(3) + self.chi * self.a * beta * beta + self.b * beta
            - self.drive
    }

    /// dI/dβ = 3χ²β² + 2χAβ + B; its sign decides branch stability.
    pub fn slope(&self, beta: f64) -> f64 {
        3.0 * self.chi * self.chi * beta * beta + 2.0 * self.chi * self.a * beta + self.b
    }

    /// Dimensionless coefficients (a, b, t) of x³ + ax² + bx = t.
    pub fn dimensionless(&self) -> (f64, f64, f64) {
        (
            self.a / self.gamma,
            self.b / (self.gamma * self.gamma),
            self.drive * self.chi / self.gamma.powi(3),
        )
    }

    /// True when the drive-independent fold conditions A < 0 and A² > 3B
    /// hold, i.e. the response curve has turning points.
    pub fn can_fold(&self) -> bool {
        self.a < 0.0 && self.a * self.a > 3.0 * self.b
    }
}

/// Position on the folded response curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Lower,
    Middle,
    Upper,
}

/// One real nonnegative root of the cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    /// Photon number β.
    pub beta: f64,
    /// Sign of dI/dβ; a marginal root (slope 0) counts as unstable.
    pub stable: bool,
    pub branch: Branch,
}

/// Full steady state reconstructed from a root of the cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    /// Photon number β = |α₁|².
    pub beta: f64,
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    /// Mechanical displacement ⟨q⟩ = −(g/ω_m)β (zero-point units).
    pub q: f64,
    /// Mechanical momentum; zero in steady state.
    pub p: f64,
    pub stable: bool,
    pub branch: Branch,
}

/// Fold turning points β₋ < β₊ where dI/dβ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoints {
    pub beta_minus: f64,
    pub beta_plus: f64,
}

/// Bistability classification of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionClass {
    /// Single root; no fold possible or drive outside the fold window.
    Monostable,
    /// Fold conditions A < 0, A² > 3B hold but the drive does not place
    /// three roots on the curve.
    BistableNecessary,
    /// Three positive roots coexist at the given drive.
    BistableActual,
}

/// Real nonnegative roots of the cubic, sorted ascending, with stability
/// flags and branch tags. Root count is 1 or 3 (counting multiplicity); a
/// unique root is tagged `Upper`.
///
/// χ = 0 degenerates to the linear response β = I/B; if additionally B = 0
/// and I > 0 there is no steady state at any intensity and the call fails.
pub fn solve_roots(c: &CubicCoefficients) -> Result<Vec<Root>> {
    if c.chi == 0.0 {
        if c.drive == 0.0 {
            return Ok(vec![root_with_stability(c, 0.0, Branch::Upper)]);
        }
        if c.b <= 0.0 {
            return Err(Error::NoSolution(format!(
                "linear response has no steady state: chi = 0, B = {} <= 0, I = {} > 0",
                c.b, c.drive
            )));
        }
        return Ok(vec![root_with_stability(c, c.drive / c.b, Branch::Upper)]);
    }
    let (a, b, t) = c.dimensionless();
    let mut xs = cubic_real_roots(a, b, -t);
    for x in &mut xs {
        *x = polish(*x, a, b, t);
    }
    // Snap roundoff-level roots to zero, then keep the nonnegative ones.
    let scale = 1.0 + a.abs() + b.abs().sqrt() + t.abs().cbrt();
    let mut betas: Vec<f64> = xs
        .into_iter()
        .map(|x| {
            if x.abs() <= 1e-13 * scale && t == 0.0 {
                0.0
            } else {
                x
            }
        })
        .filter(|&x| x >= 0.0)
        .map(|x| x * c.gamma / c.chi)
        .collect();
    betas.sort_by(f64::total_cmp);
    let n = betas.len();
    debug_assert!(
        n == 1 || n == 3,
        "positive root count must be 1 or 3, got {n}"
    );
    let branches: &[Branch] = match n {
        3 => &[Branch::Lower, Branch::Middle, Branch::Upper],
        _ => &[Branch::Upper],
    };
    Ok(betas
        .into_iter()
        .zip(branches.iter().copied())
        .map(|(beta, branch)| root_with_stability(c, beta, branch))
        .collect())
}

fn root_with_stability(c: &CubicCoefficients, beta: f64, branch: Branch) -> Root {
    Root {
        beta,
        stable: c.slope(beta) > 0.0,
        branch,
    }
}

/// All real roots of x³ + ax² + bx + c0 = 0.
///
/// Depressed-cubic reduction; the three-real-root case uses the
/// trigonometric method, the single-root case a cancellation-safe Cardano
/// form. Roots are raw (not yet polished or deduplicated).
fn cubic_real_roots(a: f64, b: f64, c0: f64) -> Vec<f64> {
    // x = y − a/3 removes the quadratic term: y³ + py + q = 0.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c0;
    let d = 0.25 * q * q + p * p * p / 27.0;
    if d <= 0.0 {
        // Three real roots (possibly repeated): y = 2√(−p/3)·cos(ψ/3 − 2πk/3).
        if p >= 0.0 {
            // d ≤ 0 with p ≥ 0 forces p = q = 0: triple root.
            return vec![-shift; 3];
        }
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0);
        let psi = arg.acos() / 3.0;
        (0..3)
            .map(|k| 2.0 * r * (psi - 2.0 * std::f64::consts::FRAC_PI_3 * k as f64).cos() - shift)
            .collect()
    } else {
        // One real root; pick the cube root that avoids cancellation.
        let s = d.sqrt();
        let u = if q <= 0.0 {
            (-0.5 * q + s).cbrt()
        } else {
            (-0.5 * q - s).cbrt()
        };
        let y = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        vec![y - shift]
    }
}

/// A few guarded Newton steps on f(x) = x³ + ax² + bx − t; keeps the best
/// residual seen. Recovers the digits the closed forms lose near the fold
/// degeneracy.
fn polish(x0: f64, a: f64, b: f64, t: f64) -> f64 {
    let f = |x: f64| ((x + a) * x + b) * x - t;
    let fp = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let mut best = x0;
    let mut best_r = f(x0).abs();
    let mut x = x0;
    for _ in 0..4 {
        let d = fp(x);
        if d == 0.0 {
            break;
        }
        x -= f(x) / d;
        let r = f(x).abs();
        if r < best_r {
            best = x;
            best_r = r;
        } else {
            break;
        }
    }
    best
}

/// Roots with the full field and mechanical steady state attached.
///
/// For each root β: α₁ = Ω/D with
/// D = (κ+Γ)/2 − iδ/2 − iχβ − (Γ²/4)e^{2iΦ}/((κ+Γ)/2 + iδ/2), which obeys
/// |D|² = χ²β² + χAβ + B so that |α₁|² = β by the cubic itself;
/// α₂ = −(Γ/2)e^{iΦ}·α₁/((κ+Γ)/2 + iδ/2); ⟨q⟩ = −(g/ω_m)β; ⟨p⟩ = 0.
pub fn solve_intensity(p: &PhysicalParams) -> Result<Vec<SteadyState>> {
    let c = CubicCoefficients::from_params(p)?;
    let kappa = p.kappa()?;
    let roots = solve_roots(&c)?;
    Ok(roots
        .into_iter()
        .map(|r| reconstruct(p, kappa, &c, r))
        .collect())
}

fn reconstruct(p: &PhysicalParams, kappa: f64, c: &CubicCoefficients, r: Root) -> SteadyState {
    if r.beta == 0.0 {
        return SteadyState {
            beta: 0.0,
            alpha1: Complex64::ZERO,
            alpha2: Complex64::ZERO,
            q: 0.0,
            p: 0.0,
            stable: r.stable,
            branch: r.branch,
        };
    }
    let half_loss = Complex64::new(0.5 * (kappa + p.gamma), 0.0);
    let half_det = Complex64::new(0.0, 0.5 * p.delta);
    let phase = Complex64::from_polar(1.0, p.phi);
    let alpha1 = if c.drive == 0.0 {
        // Undriven degenerate root: the phase is free; fix it real.
        Complex64::new(r.beta.sqrt(), 0.0)
    } else {
        let den = half_loss
            - half_det
            - Complex64::new(0.0, c.chi * r.beta)
            - phase * phase * (0.25 * p.gamma * p.gamma) / (half_loss + half_det);
        Complex64::new(c.drive.sqrt(), 0.0) / den
    };
    let alpha2 = -phase * (0.5 * p.gamma) * alpha1 / (half_loss + half_det);
    SteadyState {
        beta: r.beta,
        alpha1,
        alpha2,
        q: -(p.g / p.omega_m) * r.beta,
        p: 0.0,
        stable: r.stable,
        branch: r.branch,
    }
}

/// Fold turning points β± = (−A ± √(A²−3B))/(3χ), present only when A < 0,
/// A² > 3B and β₋ > 0. β₋ is formed from the product identity
/// β₊β₋ = B/(3χ²) to avoid cancellation.
pub fn turning_points(c: &CubicCoefficients) -> Result<Option<TurningPoints>> {
    if c.chi == 0.0 {
        return Err(Error::Unsupported(
            "turning points require a nonzero Kerr coefficient".into(),
        ));
    }
    if !c.can_fold() {
        return Ok(None);
    }
    let s = (c.a * c.a - 3.0 * c.b).sqrt();
    let beta_plus = (-c.a + s) / (3.0 * c.chi);
    let beta_minus = c.b / (3.0 * c.chi * c.chi * beta_plus);
    if beta_minus <= 0.0 {
        return Ok(None);
    }
    Ok(Some(TurningPoints {
        beta_minus,
        beta_plus,
    }))
}

/// Classifies every (δ, φ) node of a grid at fixed (κ, Γ, χ, I).
///
/// Cells failing the drive-independent fold conditions are monostable
/// without solving; the cubic is solved only where a fold is possible.
pub fn bistable_region_map(
    p: &PhysicalParams,
    delta_axis: Axis,
    phi_axis: Axis,
) -> Result<GridResult<RegionClass>> {
    p.validate()?;
    let kappa = p.kappa()?;
    let chi = p.chi()?;
    let drive = p.drive()?;
    let gamma = p.gamma;
    Ok(GridResult::evaluate(
        delta_axis,
        phi_axis,
        move |delta, phi| classify_cell(delta, kappa, gamma, phi, chi, drive),
    ))
}

fn classify_cell(
    delta: f64,
    kappa: f64,
    gamma: f64,
    phi: f64,
    chi: f64,
    drive: f64,
) -> RegionClass {
    let c = match CubicCoefficients::from_rates(delta, kappa, gamma, phi, chi, drive) {
        Ok(c) => c,
        Err(_) => return RegionClass::Monostable,
    };
    if !c.can_fold() || chi == 0.0 {
        return RegionClass::Monostable;
    }
    match solve_roots(&c) {
        Ok(roots) if roots.len() == 3 => RegionClass::BistableActual,
        _ => RegionClass::BistableNecessary,
    }
}
