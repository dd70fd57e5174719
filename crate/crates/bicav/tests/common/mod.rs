//! Shared fixtures for the integration suites: a seeded instance generator
//! and an independent bisection root finder used to cross-check the
//! closed-form cubic solver.
#![allow(dead_code)]

use bicav::params::{inflate, PhysicalParams, ReducedParams};
use bicav::steadystate::CubicCoefficients;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{PI, TAU};

/// Reduced stiffness (Γ/ω_m = 50) keeps the integrator affordable in tests.
pub const TEST_GAMMA: f64 = TAU * 5.0e5;
pub const TEST_OMEGA_M: f64 = TAU * 1.0e4;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Inflates with heavily damped mechanics (γ_m = 2Γ). An underdamped mirror
/// at this stiffness turns the upper branch into a parametric oscillator
/// (radiation-pressure anti-damping), so quasi-static settling requires an
/// overdamped mechanical mode; the steady-state response is unaffected.
pub fn inflate_damped(r: &ReducedParams) -> PhysicalParams {
    let p = inflate(r, TEST_GAMMA, TEST_OMEGA_M, 1.55e-6).unwrap();
    PhysicalParams {
        gamma_m: 100.0 * p.omega_m,
        ..p
    }
}

/// Dimensionless knobs drawn over the operating box the sweep maps explore.
pub fn random_knobs(rng: &mut StdRng) -> ReducedParams {
    ReducedParams {
        d: rng.random_range(-0.3..0.3),
        k: rng.random_range(0.002..0.03),
        phi: rng.random_range(-0.03 * PI..0.005 * PI),
        chi_t: 10f64.powf(rng.random_range(-13.0..-10.0)),
        drive_t: 0.0,
    }
}

/// β values where dI/dβ = 0, smaller first; None when the response curve has
/// no turning points.
pub fn turning_betas(c: &CubicCoefficients) -> Option<(f64, f64)> {
    let disc = c.a * c.a - 3.0 * c.b;
    if c.chi == 0.0 || c.a >= 0.0 || disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((-c.a - s) / (3.0 * c.chi), (-c.a + s) / (3.0 * c.chi)))
}

/// Dimensionless drive window (lo, hi) with three positive roots, clipped to
/// positive drives; uses only coefficient arithmetic, no root solving.
pub fn drive_window_t(c: &CubicCoefficients) -> Option<(f64, f64)> {
    let (b_small, b_large) = turning_betas(c)?;
    // The polynomial has its local maximum at the smaller turning β and its
    // local minimum at the larger one.
    let i_of = |b: f64| c.residual(b) + c.drive;
    let scale = c.chi / c.gamma.powi(3);
    let lo = (i_of(b_large) * scale).max(0.0);
    let hi = i_of(b_small) * scale;
    (hi > lo).then_some((lo, hi))
}

/// Instance whose drive sits inside the bistable window, at least `margin`
/// (fraction of the window) away from either fold.
pub fn random_bistable(rng: &mut StdRng, margin: f64) -> ReducedParams {
    loop {
        let mut r = random_knobs(rng);
        let c = CubicCoefficients::from_reduced(&r).unwrap();
        let Some((lo, hi)) = drive_window_t(&c) else {
            continue;
        };
        let u = rng.random_range(margin..1.0 - margin);
        r.drive_t = lo + u * (hi - lo);
        return r;
    }
}

/// Instance of any class: the drive ranges from below the fold window to
/// above it, so draws cover monostable, bistable, and post-fold responses.
pub fn random_any(rng: &mut StdRng) -> ReducedParams {
    let mut r = random_knobs(rng);
    let c = CubicCoefficients::from_reduced(&r).unwrap();
    match drive_window_t(&c) {
        Some((lo, hi)) => {
            let u = rng.random_range(-0.6..1.6);
            r.drive_t = (lo + u * (hi - lo)).max(0.05 * (lo + hi));
        }
        None => {
            // Monotone response: aim the drive at a representative photon
            // number so draws are not all trivially small.
            let beta = 10f64.powf(rng.random_range(-3.0..0.0)) / r.chi_t;
            let i_target = c.residual(beta) + c.drive;
            r.drive_t = i_target * c.chi / c.gamma.powi(3);
        }
    }
    r
}

/// All nonnegative roots of the intensity polynomial by monotone-interval
/// bisection. The turning βs split the axis into intervals on which the
/// polynomial is strictly monotone, so each bracket holds at most one root
/// and the scan cannot miss or double-count. Independent of the closed-form
/// solver.
pub fn bisection_roots(c: &CubicCoefficients) -> Vec<f64> {
    let f = |b: f64| c.residual(b);
    if c.chi == 0.0 {
        if c.b == 0.0 {
            return Vec::new();
        }
        return vec![c.drive / c.b];
    }
    // Beyond this bound the cubic term dominates every other term.
    let beta_max =
        3.0 * ((c.drive / (c.chi * c.chi)).cbrt() + c.a.abs() / c.chi + c.b.sqrt() / c.chi) + 1.0;
    let mut knots = vec![0.0];
    if let Some((b1, b2)) = turning_betas(c) {
        if b1 > 0.0 && b1 < beta_max {
            knots.push(b1);
        }
        if b2 > 0.0 && b2 < beta_max {
            knots.push(b2);
        }
    }
    knots.push(beta_max);
    let mut roots = Vec::new();
    if f(0.0) == 0.0 {
        roots.push(0.0);
    }
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let mut fa = f(a);
        let fb = f(b);
        if fa == 0.0 || fa * fb > 0.0 {
            // fa == 0 at an interior knot means a turning-point tangency;
            // the drawn drives keep a margin from the folds so this only
            // occurs for the β = 0 endpoint handled above.
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
    roots
}
