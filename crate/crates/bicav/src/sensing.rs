//! Sensitivity figures of merit for coupling-strength discrimination.
//!
//! The observable is the ratio η(φ, δ) = β(g₁)/β(g₂) of upper-branch cavity
//! intensities computed at two candidate coupling strengths g₁ < g₂. Two
//! operating regimes arise:
//!
//! * region I: both couplings give the same number of steady-state roots
//!   and η > 1 (graded intensity contrast);
//! * region II: the root counts differ, i.e. one coupling is bistable where
//!   the other is monostable, so the contrast is a branch jump and η⁻¹ is
//!   the natural readout (it reaches 10²-scale values).
//!
//! "Upper branch" always means the largest stable root, which keeps η
//! single-valued without reference to sweep history.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridResult};
use crate::params::PhysicalParams;
use crate::steadystate::solve_intensity;

/// Operating-region classification of a (φ, δ, g₁, g₂) point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Same root counts but no enhancement (η ≤ 1).
    None,
    /// Same root counts and η > 1.
    I,
    /// Root counts differ: exactly one coupling is bistable here.
    II,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::None => "none",
            Region::I => "I",
            Region::II => "II",
        })
    }
}

/// Sensitivity readout at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub phi: f64,
    pub delta: f64,
    /// Upper-branch intensity at the smaller coupling.
    pub beta_g1: f64,
    /// Upper-branch intensity at the larger coupling.
    pub beta_g2: f64,
    /// β(g₁)/β(g₂).
    pub eta: f64,
    pub region: Region,
}

/// η at the operating point of `p`, comparing couplings `g1 ≤ g2`.
pub fn sensitivity(p: &PhysicalParams, g1: f64, g2: f64) -> Result<SensitivityPoint> {
    check_pair(g1, g2)?;
    point(p, g1, g2)
}

/// η over a (δ, φ) grid; cells where either coupling has no positive stable
/// root are recorded as `None` rather than failing the whole map.
pub fn sensitivity_map(
    p: &PhysicalParams,
    g1: f64,
    g2: f64,
    delta_axis: Axis,
    phi_axis: Axis,
) -> Result<GridResult<Option<SensitivityPoint>>> {
    check_pair(g1, g2)?;
    let base = *p;
    Ok(GridResult::evaluate(
        delta_axis,
        phi_axis,
        move |delta, phi| point(&PhysicalParams { delta, phi, ..base }, g1, g2).ok(),
    ))
}

/// Region label alone; numeric no-solution points classify as `None`.
pub fn region_classify(p: &PhysicalParams, g1: f64, g2: f64) -> Result<Region> {
    check_pair(g1, g2)?;
    match point(p, g1, g2) {
        Ok(s) => Ok(s.region),
        Err(Error::NoSolution(_)) => Ok(Region::None),
        Err(e) => Err(e),
    }
}

/// δ-window over which η⁻¹ stays within (1 − drop) of its peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthReport {
    /// Window width in rad/s.
    pub width: f64,
    pub lo: f64,
    pub hi: f64,
    /// δ of the η⁻¹ peak.
    pub peak_delta: f64,
    pub peak_inverse_eta: f64,
}

/// Scans δ at the fixed φ of `p` and measures the width of the contiguous
/// window around the η⁻¹ peak where η⁻¹ ≥ (1 − drop)·peak. Window edges are
/// linearly interpolated between samples; a window clipped by the scan range
/// ends at the range edge.
pub fn bandwidth(
    p: &PhysicalParams,
    g1: f64,
    g2: f64,
    drop: f64,
    delta_axis: Axis,
) -> Result<BandwidthReport> {
    check_pair(g1, g2)?;
    if !(drop > 0.0 && drop < 1.0) {
        return Err(Error::Domain(format!(
            "drop fraction must lie in (0,1), got {drop}"
        )));
    }
    let inv = scan(p, g1, g2, delta_axis, |s| 1.0 / s.eta)?;
    let (imax, peak) = argmax(&inv)
        .ok_or_else(|| Error::UndefinedBandwidth("no valid response in the scan window".into()))?;
    let vmin = inv
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if peak - vmin <= 1e-9 * peak.abs() {
        return Err(Error::UndefinedBandwidth(format!(
            "response is flat over the scan window (peak {peak:.6e}, min {vmin:.6e})"
        )));
    }
    let threshold = (1.0 - drop) * peak;
    let x = |i: usize| delta_axis.value(i);
    let mut a = imax;
    while a > 0 && inv[a - 1] >= threshold {
        a -= 1;
    }
    let mut b = imax;
    while b + 1 < inv.len() && inv[b + 1] >= threshold {
        b += 1;
    }
    let lo = if a == 0 || !inv[a - 1].is_finite() {
        x(a)
    } else {
        x(a - 1) + (threshold - inv[a - 1]) * (x(a) - x(a - 1)) / (inv[a] - inv[a - 1])
    };
    let hi = if b + 1 == inv.len() || !inv[b + 1].is_finite() {
        x(b)
    } else {
        x(b) + (threshold - inv[b]) * (x(b + 1) - x(b)) / (inv[b + 1] - inv[b])
    };
    Ok(BandwidthReport {
        width: hi - lo,
        lo,
        hi,
        peak_delta: x(imax),
        peak_inverse_eta: peak,
    })
}

/// Best detuning for the η readout at fixed φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetuningOptimum {
    pub delta_opt: f64,
    pub eta_max: f64,
    /// True when η is flat over the window; `delta_opt` is then the window
    /// center rather than a meaningful argmax.
    pub degenerate: bool,
}

/// Argmax of η over the δ scan window at the fixed φ of `p`.
pub fn optimal_detuning(
    p: &PhysicalParams,
    g1: f64,
    g2: f64,
    delta_axis: Axis,
) -> Result<DetuningOptimum> {
    check_pair(g1, g2)?;
    let eta = scan(p, g1, g2, delta_axis, |s| s.eta)?;
    let (imax, emax) = argmax(&eta)
        .ok_or_else(|| Error::NoSolution("no valid η sample in the scan window".into()))?;
    let vmin = eta
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if emax - vmin <= 1e-9 * emax.abs() {
        let center = 0.5 * (delta_axis.start + delta_axis.stop);
        return Ok(DetuningOptimum {
            delta_opt: center,
            eta_max: emax,
            degenerate: true,
        });
    }
    Ok(DetuningOptimum {
        delta_opt: delta_axis.value(imax),
        eta_max: emax,
        degenerate: false,
    })
}

/// Largest stable intensity and the root count for coupling `g`.
fn upper_branch(p: &PhysicalParams, g: f64) -> Result<(f64, usize)> {
    let states = solve_intensity(&PhysicalParams { g, ..*p })?;
    let count = states.len();
    let beta = states
        .iter()
        .rev()
        .find(|s| s.stable)
        .map(|s| s.beta)
        .ok_or_else(|| Error::NoSolution(format!("no stable steady state at g = {g:.6e} rad/s")))?;
    Ok((beta, count))
}

fn point(p: &PhysicalParams, g1: f64, g2: f64) -> Result<SensitivityPoint> {
    let (beta_g1, n1) = upper_branch(p, g1)?;
    let (beta_g2, n2) = upper_branch(p, g2)?;
    if !(beta_g1 > 0.0) || !(beta_g2 > 0.0) {
        return Err(Error::NoSolution(
            "intensity ratio undefined: an upper-branch intensity is zero".into(),
        ));
    }
    let eta = beta_g1 / beta_g2;
    let region = if n1 != n2 {
        Region::II
    } else if eta > 1.0 {
        Region::I
    } else {
        Region::None
    };
    Ok(SensitivityPoint {
        phi: p.phi,
        delta: p.delta,
        beta_g1,
        beta_g2,
        eta,
        region,
    })
}

fn check_pair(g1: f64, g2: f64) -> Result<()> {
    if !g1.is_finite() || !g2.is_finite() || g1 < 0.0 || g2 < 0.0 {
        return Err(Error::Domain(format!(
            "couplings must be finite and non-negative, got g1 = {g1}, g2 = {g2}"
        )));
    }
    if g1 > g2 {
        return Err(Error::Usage(format!(
            "g1 must not exceed g2 (convention: g1 is the smaller coupling), got g1 = {g1:.6e} > g2 = {g2:.6e}"
        )));
    }
    Ok(())
}

/// Per-sample readout along the δ axis; invalid points become −∞ so they
/// never win an argmax.
fn scan(
    p: &PhysicalParams,
    g1: f64,
    g2: f64,
    delta_axis: Axis,
    f: impl Fn(&SensitivityPoint) -> f64,
) -> Result<Vec<f64>> {
    let mut out = vec![f64::NEG_INFINITY; delta_axis.n];
    for (i, v) in out.iter_mut().enumerate() {
        let delta = delta_axis.value(i);
        match point(&PhysicalParams { delta, ..*p }, g1, g2) {
            Ok(s) => *v = f(&s),
            Err(Error::NoSolution(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{PI, TAU};

    const G1: f64 = TAU * 1.0;
    const G2: f64 = TAU * 3.0;

    fn at_phi(phi_pi: f64) -> PhysicalParams {
        PhysicalParams {
            phi: phi_pi * PI,
            ..PhysicalParams::default()
        }
    }

    #[test]
    fn rejects_reversed_or_invalid_pairs() {
        let p = PhysicalParams::default();
        assert!(matches!(sensitivity(&p, G2, G1), Err(Error::Usage(_))));
        assert!(matches!(sensitivity(&p, -1.0, G2), Err(Error::Domain(_))));
        assert!(matches!(
            bandwidth(&p, G2, G1, 0.1, axis(-0.1, 0.1, 11)),
            Err(Error::Usage(_))
        ));
    }

    fn axis(lo_gamma: f64, hi_gamma: f64, n: usize) -> Axis {
        let g = PhysicalParams::default().gamma;
        Axis::new(lo_gamma * g, hi_gamma * g, n).unwrap()
    }

    #[test]
    fn equal_couplings_give_unit_ratio() {
        let s = sensitivity(&PhysicalParams::default(), G1, G1).unwrap();
        assert_eq!(s.eta, 1.0);
        assert_eq!(s.region, Region::None);
    }

    #[test]
    fn near_singular_point_ratio_is_cube_root_law() {
        // With κ → 0 at δ = φ = 0 the linear loss vanishes and
        // β → (I/χ²)^{1/3}, so η → (χ₂/χ₁)^{2/3} = 3^{4/3} for g₂ = 3g₁.
        let base = PhysicalParams::default();
        let kappa = 1e-6 * base.gamma;
        let p = PhysicalParams {
            kappa1: kappa,
            kappa2: kappa,
            ..base
        };
        let s = sensitivity(&p, G1, G2).unwrap();
        assert_relative_eq!(s.eta, 3.0_f64.powf(4.0 / 3.0), max_relative = 1e-5);
        assert_eq!(s.region, Region::I);
    }

    #[test]
    fn peak_enhancement_at_fold_phase() {
        let s = sensitivity(&at_phi(-0.008), G1, G2).unwrap();
        assert_relative_eq!(s.eta, 7.2830, max_relative = 1e-3);
        assert_eq!(s.region, Region::I);
        assert!(s.beta_g1 > s.beta_g2 && s.beta_g2 > 0.0);
    }

    #[test]
    fn symmetric_phase_enhancement() {
        let s = sensitivity(&at_phi(0.0), G1, G2).unwrap();
        assert_relative_eq!(s.eta, 4.1963, max_relative = 1e-3);
        assert_eq!(s.region, Region::I);
    }

    #[test]
    fn branch_split_region_has_inverted_ratio() {
        // Here only the larger coupling is bistable: its upper branch is far
        // above the monostable response, so η collapses and η⁻¹ is large.
        let s = sensitivity(&at_phi(-0.012), G1, G2).unwrap();
        assert_eq!(s.region, Region::II);
        assert!(s.eta < 0.05, "eta = {}", s.eta);
        assert!(1.0 / s.eta > 20.0);
    }

    #[test]
    fn positive_phase_never_splits() {
        let s = sensitivity(&at_phi(0.01), G1, G2).unwrap();
        assert_ne!(s.region, Region::II);
        assert!(s.eta > 0.0);
    }

    #[test]
    fn map_covers_both_regions() {
        let p = PhysicalParams::default();
        let dx = axis(-0.15, 0.05, 21);
        let py = Axis::new(-0.03 * PI, 0.0, 21).unwrap();
        let map = sensitivity_map(&p, G1, G2, dx, py).unwrap();
        let mut max_eta = 0.0_f64;
        let mut region_ii = 0;
        for (_, _, cell) in map.iter() {
            let s = cell
                .as_ref()
                .expect("all cells solvable at these parameters");
            max_eta = max_eta.max(s.eta);
            if s.region == Region::II {
                region_ii += 1;
            }
        }
        assert!((6.5..8.6).contains(&max_eta), "max eta {max_eta}");
        assert!(region_ii > 0);
    }

    #[test]
    fn equal_pair_map_is_uniform() {
        let p = PhysicalParams::default();
        let dx = axis(-0.1, 0.1, 5);
        let py = Axis::new(-0.01 * PI, 0.0, 5).unwrap();
        let map = sensitivity_map(&p, G1, G1, dx, py).unwrap();
        for (_, _, cell) in map.iter() {
            let s = cell.as_ref().unwrap();
            assert_eq!(s.eta, 1.0);
            assert_eq!(s.region, Region::None);
        }
    }

    #[test]
    fn classify_matches_point_regions() {
        assert_eq!(region_classify(&at_phi(-0.002), G1, G2).unwrap(), Region::I);
        assert_eq!(
            region_classify(&at_phi(-0.012), G1, G2).unwrap(),
            Region::II
        );
        // Undriven: no positive intensity anywhere, classified as no region.
        let undriven = PhysicalParams {
            p_in: 0.0,
            ..PhysicalParams::default()
        };
        assert_eq!(region_classify(&undriven, G1, G2).unwrap(), Region::None);
    }

    #[test]
    fn narrow_and_wide_readout_windows() {
        let ax = axis(-0.3, 0.1, 2001);
        let g = PhysicalParams::default().gamma;
        let narrow = bandwidth(&at_phi(-0.023), G1, G2, 0.1, ax).unwrap();
        assert_relative_eq!(narrow.width / g, 0.05683, max_relative = 3e-2);
        let wide = bandwidth(&at_phi(-0.018), G1, G2, 0.1, ax).unwrap();
        assert_relative_eq!(wide.width / g, 0.12902, max_relative = 3e-2);
        // Both peaks sit near δ ≈ −0.08Γ.
        assert_abs_diff_eq!(narrow.peak_delta / g, -0.079, epsilon = 5e-3);
        assert!(narrow.lo < narrow.peak_delta && narrow.peak_delta < narrow.hi);
    }

    #[test]
    fn flat_response_has_no_bandwidth() {
        let err = bandwidth(&at_phi(-0.023), G1, G1, 0.1, axis(-0.2, 0.1, 101)).unwrap_err();
        assert!(matches!(err, Error::UndefinedBandwidth(_)), "got {err}");
    }

    #[test]
    fn bandwidth_rejects_bad_drop() {
        for drop in [0.0, 1.0, -0.5, f64::NAN] {
            let err = bandwidth(&at_phi(-0.023), G1, G2, drop, axis(-0.2, 0.1, 11)).unwrap_err();
            assert!(matches!(err, Error::Domain(_)));
        }
    }

    #[test]
    fn optimum_detuning_location_and_robustness() {
        let g = PhysicalParams::default().gamma;
        let ax = axis(-0.1, 0.05, 1501);
        let p = at_phi(-0.008);
        let opt = optimal_detuning(&p, G1, G2, ax).unwrap();
        assert!(!opt.degenerate);
        assert_abs_diff_eq!(opt.delta_opt / g, -0.0255, epsilon = 2e-3);
        assert_relative_eq!(opt.eta_max, 7.427, max_relative = 1e-2);
        // The optimum is broad: η stays within 10% of the peak over ±0.015Γ.
        for shift in [-0.015, 0.015] {
            let s = sensitivity(
                &PhysicalParams {
                    delta: opt.delta_opt + shift * g,
                    ..p
                },
                G1,
                G2,
            )
            .unwrap();
            assert!(s.eta >= 0.9 * opt.eta_max, "eta {} at shift {shift}", s.eta);
        }
    }

    #[test]
    fn linear_limit_is_degenerate() {
        // Negligible couplings make both responses linear, so η ≡ 1 and the
        // argmax is meaningless; the window center is reported instead.
        let ax = axis(-0.1, 0.05, 101);
        let opt = optimal_detuning(&at_phi(0.0), TAU * 1e-6, TAU * 3e-6, ax).unwrap();
        assert!(opt.degenerate);
        assert_relative_eq!(opt.delta_opt, 0.5 * (ax.start + ax.stop));
        assert_relative_eq!(opt.eta_max, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        // Computing both intensities from the dimensionless cubic must give
        // the same ratio as the dimensional route.
        use crate::params::reduce;
        use crate::steadystate::{solve_roots, CubicCoefficients};
        for phi_pi in [-0.002, -0.008, -0.012] {
            let p = at_phi(phi_pi);
            let s = sensitivity(&p, G1, G2).unwrap();
            let mut beta = [0.0; 2];
            for (k, g) in [G1, G2].into_iter().enumerate() {
                let pg = PhysicalParams { g, ..p };
                let r = reduce(&pg).unwrap();
                let roots = solve_roots(&CubicCoefficients::from_reduced(&r).unwrap()).unwrap();
                // from_reduced solves in units of Γ with χ = chi_t·Γ, so the
                // returned β is already x/chi_t.
                beta[k] = roots.iter().rev().find(|x| x.stable).unwrap().beta;
            }
            assert_relative_eq!(s.eta, beta[0] / beta[1], max_relative = 1e-9);
        }
    }

    #[test]
    fn loss_degrades_the_contrast() {
        let base = PhysicalParams::default();
        let scan = |kappa_rel: f64| {
            let kappa = kappa_rel * base.gamma;
            let p = PhysicalParams {
                kappa1: kappa,
                kappa2: kappa,
                ..base
            };
            let mut max_eta = 0.0_f64;
            let mut any_ii = false;
            for i in 0..=300 {
                let phi = -0.03 * PI * i as f64 / 300.0;
                let s = sensitivity(&PhysicalParams { phi, ..p }, G1, G2).unwrap();
                max_eta = max_eta.max(s.eta);
                any_ii |= s.region == Region::II;
            }
            (max_eta, any_ii)
        };
        let (eta_degraded, ii_degraded) = scan(0.03);
        assert!(eta_degraded < 2.0, "max eta {eta_degraded}");
        assert!(
            !ii_degraded,
            "no branch splitting should survive kappa = 0.03 gamma"
        );
        let (eta_sharp, _) = scan(0.002);
        assert!(eta_sharp > 6.0, "max eta {eta_sharp}");
    }

    #[test]
    fn intermediate_loss_keeps_a_split_window() {
        let base = PhysicalParams::default();
        let kappa = 0.008 * base.gamma;
        let p = PhysicalParams {
            kappa1: kappa,
            kappa2: kappa,
            delta: -0.08 * base.gamma,
            ..base
        };
        let mut best_inv = 0.0_f64;
        for i in 0..=400 {
            let phi = -0.04 * PI * i as f64 / 400.0;
            let s = sensitivity(&PhysicalParams { phi, ..p }, G1, G2).unwrap();
            if s.region == Region::II {
                best_inv = best_inv.max(1.0 / s.eta);
            }
        }
        assert!(
            best_inv >= 10.0,
            "max inverse eta in split window: {best_inv}"
        );
    }
}
