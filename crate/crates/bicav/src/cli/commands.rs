//! Subcommand execution.
//!
//! Each function renders one artifact set into the output directory: a data
//! table (`<stem>.csv` or `<stem>.json`), a `<stem>.meta.json` sidecar with
//! the resolved configuration, and for some commands a `<stem>.summary.json`
//! with headline numbers. Tables are deterministic; timestamps live only in
//! the sidecar.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::cli::config::{RunConfig, SweepAxis, SweepSpec};
use crate::cli::output::{write_meta, write_summary, write_table, Cell, Format, TableDoc};
use crate::dynamics::{self, IntegratorOptions, MeanFieldState, SweptParam};
use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::params::{nanosphere_coupling, PhysicalParams};
use crate::sensing::{self, Region, SensitivityPoint};
use crate::spectrum;
use crate::steadystate::{self, Branch, CubicCoefficients, RegionClass};

/// Command-line overrides that patch the file configuration.
///
/// Ranges are given in reduced units (δ in units of Γ, φ in units of π) and
/// are converted when applied to a sweep axis.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub delta_range: Option<(f64, f64)>,
    pub phi_range: Option<(f64, f64)>,
    /// Grid points: first for 1-D sweeps and the δ axis, second for the φ
    /// axis of maps (defaults to the first).
    pub grid: Option<(usize, Option<usize>)>,
    /// Hysteresis step count per leg.
    pub steps: Option<usize>,
    /// Relative drop defining the sensing bandwidth window.
    pub drop: Option<f64>,
}

/// Everything a subcommand needs: resolved configuration, output directory,
/// table format, and command-line overrides.
pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub format: Format,
    pub overrides: Overrides,
}

impl Ctx<'_> {
    fn params(&self) -> &PhysicalParams {
        &self.cfg.params
    }

    /// Resolves the 1-D sweep for this command: the `[sweep]` section when
    /// present and of an allowed kind, the built-in default otherwise, with
    /// command-line range and grid overrides applied last.
    fn resolve_1d(&self, allowed: &[SweepAxis], fallback: SweepSpec) -> Result<SweepSpec> {
        if self.cfg.sweep2.is_some() {
            return Err(Error::Usage(
                "this command takes a single sweep axis; remove [sweep2]".into(),
            ));
        }
        let mut spec = match self.cfg.sweep {
            Some(s) if allowed.contains(&s.axis) => s,
            Some(s) => {
                return Err(Error::Usage(format!(
                    "this command cannot sweep '{}'; allowed: {}",
                    axis_key(s.axis),
                    allowed
                        .iter()
                        .map(|&a| axis_key(a))
                        .collect::<Vec<_>>()
                        .join(", ")
                )))
            }
            None => fallback,
        };
        self.patch_spec(&mut spec);
        Ok(spec)
    }

    /// Resolves the (δ, φ) axes for map commands from `[sweep]`/`[sweep2]`
    /// in either order, falling back to per-command defaults.
    fn resolve_map(&self, d_fallback: SweepSpec, p_fallback: SweepSpec) -> Result<(Axis, Axis)> {
        let mut d_slot: Option<SweepSpec> = None;
        let mut p_slot: Option<SweepSpec> = None;
        for s in [self.cfg.sweep, self.cfg.sweep2].into_iter().flatten() {
            let slot = match s.axis {
                SweepAxis::Delta => &mut d_slot,
                SweepAxis::Phi => &mut p_slot,
                other => {
                    return Err(Error::Usage(format!(
                        "map commands sweep delta and phi, not '{}'",
                        axis_key(other)
                    )))
                }
            };
            if slot.replace(s).is_some() {
                return Err(Error::Usage(format!(
                    "duplicate '{}' sweep axis",
                    axis_key(s.axis)
                )));
            }
        }
        let mut d = d_slot.unwrap_or(d_fallback);
        let mut p = p_slot.unwrap_or(p_fallback);
        self.patch_spec(&mut d);
        self.patch_spec(&mut p);
        if let Some((nx, ny)) = self.overrides.grid {
            d.points = nx;
            p.points = ny.unwrap_or(nx);
        }
        Ok((axis_of(&d)?, axis_of(&p)?))
    }

    fn patch_spec(&self, spec: &mut SweepSpec) {
        match spec.axis {
            SweepAxis::Delta => {
                if let Some((lo, hi)) = self.overrides.delta_range {
                    let g = self.params().gamma;
                    spec.start = lo * g;
                    spec.stop = hi * g;
                }
            }
            SweepAxis::Phi => {
                if let Some((lo, hi)) = self.overrides.phi_range {
                    spec.start = lo * PI;
                    spec.stop = hi * PI;
                }
            }
            _ => {}
        }
        if let Some((n, _)) = self.overrides.grid {
            spec.points = n;
        }
    }

    /// Writes the table and its metadata sidecar, reporting both paths.
    fn emit(&self, stem: &str, doc: &TableDoc, derived: serde_json::Value) -> Result<()> {
        let table = write_table(self.out, stem, self.format, doc, self.cfg.precision)?;
        let meta = json!({
            "tool": "bicav",
            "version": env!("CARGO_PKG_VERSION"),
            "command": stem,
            "generated_unix_s": unix_seconds(),
            "rows": doc.rows.len(),
            "config": self.cfg,
            "derived": derived,
        });
        let meta_path = write_meta(self.out, stem, &meta)?;
        println!("wrote {}", table.display());
        println!("wrote {}", meta_path.display());
        Ok(())
    }

    fn emit_summary(&self, stem: &str, summary: &serde_json::Value) -> Result<()> {
        let path = write_summary(self.out, stem, summary)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn axis_key(a: SweepAxis) -> &'static str {
    match a {
        SweepAxis::Phi => "phi",
        SweepAxis::Delta => "delta",
        SweepAxis::Power => "power",
        SweepAxis::Kappa => "kappa",
        SweepAxis::G => "g",
    }
}

fn axis_of(spec: &SweepSpec) -> Result<Axis> {
    Axis::new(spec.start, spec.stop, spec.points)
}

fn spec_of(axis: SweepAxis, start: f64, stop: f64, points: usize) -> SweepSpec {
    SweepSpec {
        axis,
        start,
        stop,
        points,
    }
}

/// Returns a parameter set with the swept quantity replaced; `kappa` moves
/// both mirror rates together.
fn with_axis(p: &PhysicalParams, axis: SweepAxis, v: f64) -> PhysicalParams {
    match axis {
        SweepAxis::Phi => PhysicalParams { phi: v, ..*p },
        SweepAxis::Delta => PhysicalParams { delta: v, ..*p },
        SweepAxis::Power => PhysicalParams { p_in: v, ..*p },
        SweepAxis::Kappa => PhysicalParams {
            kappa1: v,
            kappa2: v,
            ..*p
        },
        SweepAxis::G => PhysicalParams { g: v, ..*p },
    }
}

/// Column pair naming the swept quantity in absolute and reduced units.
fn axis_columns(axis: SweepAxis) -> [&'static str; 2] {
    match axis {
        SweepAxis::Phi => ["phi_rad", "phi_over_pi"],
        SweepAxis::Delta => ["delta_rad_s", "delta_over_gamma"],
        SweepAxis::Power => ["p_in_w", "drive_t"],
        SweepAxis::Kappa => ["kappa_rad_s", "kappa_over_gamma"],
        SweepAxis::G => ["g_rad_s", "g_over_2pi_hz"],
    }
}

/// Cell values for the two axis columns at swept value `v`.
fn axis_cells(axis: SweepAxis, v: f64, pm: &PhysicalParams) -> (f64, f64) {
    match axis {
        SweepAxis::Phi => (v, v / PI),
        SweepAxis::Delta => (v, v / pm.gamma),
        SweepAxis::Power => {
            let t = match (pm.drive(), pm.chi()) {
                (Ok(i), Ok(c)) => i * c / pm.gamma.powi(3),
                _ => f64::NAN,
            };
            (v, t)
        }
        SweepAxis::Kappa => (v, v / pm.gamma),
        SweepAxis::G => (v, v / TAU),
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Lower => "lower",
        Branch::Middle => "middle",
        Branch::Upper => "upper",
    }
}

fn class_name(c: RegionClass) -> (&'static str, i64) {
    match c {
        RegionClass::Monostable => ("monostable", 0),
        RegionClass::BistableNecessary => ("bistable-necessary", 1),
        RegionClass::BistableActual => ("bistable-actual", 2),
    }
}

/// Complex eigenvalue pair along a 1-D sweep, with the level splitting;
/// for detuning sweeps the metadata lists located exceptional points.
pub fn eigen(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let fallback = spec_of(SweepAxis::Delta, -2.0 * p.gamma, 2.0 * p.gamma, 401);
    let spec = ctx.resolve_1d(
        &[SweepAxis::Delta, SweepAxis::Phi, SweepAxis::Kappa],
        fallback,
    )?;
    let axis = axis_of(&spec)?;
    let [c0, c1] = axis_columns(spec.axis);
    let mut doc = TableDoc::new(vec![
        c0,
        c1,
        "re_lambda_plus_rad_s",
        "im_lambda_plus_rad_s",
        "re_lambda_minus_rad_s",
        "im_lambda_minus_rad_s",
        "re_lambda_plus_over_gamma",
        "im_lambda_plus_over_gamma",
        "re_lambda_minus_over_gamma",
        "im_lambda_minus_over_gamma",
        "splitting_over_gamma",
        "splitting_angle_rad",
    ]);
    for i in 0..axis.n {
        let v = axis.value(i);
        let pm = with_axis(p, spec.axis, v);
        let sp = spectrum::eigenvalues_closed_form(pm.delta, pm.kappa()?, pm.gamma, pm.phi)?;
        let (a0, a1) = axis_cells(spec.axis, v, &pm);
        let g = pm.gamma;
        doc.push(vec![
            Cell::F(a0),
            Cell::F(a1),
            Cell::F(sp.lambda_plus.re),
            Cell::F(sp.lambda_plus.im),
            Cell::F(sp.lambda_minus.re),
            Cell::F(sp.lambda_minus.im),
            Cell::F(sp.lambda_plus.re / g),
            Cell::F(sp.lambda_plus.im / g),
            Cell::F(sp.lambda_minus.re / g),
            Cell::F(sp.lambda_minus.im / g),
            Cell::F(sp.splitting_magnitude),
            Cell::F(sp.splitting_angle),
        ]);
    }
    let derived = if spec.axis == SweepAxis::Delta {
        let eps = spectrum::exceptional_points(
            p.kappa()?,
            p.gamma,
            p.phi,
            spec.start,
            spec.stop,
            spec.points.max(64),
        )?;
        let over_gamma: Vec<f64> = eps.iter().map(|d| d / p.gamma).collect();
        json!({
            "exceptional_points_rad_s": eps,
            "exceptional_points_over_gamma": over_gamma,
        })
    } else {
        json!({})
    };
    ctx.emit("eigen", &doc, derived)
}

/// Steady-state cubic coefficients along a 1-D sweep, with the fold window.
pub fn coeffs(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let fallback = spec_of(SweepAxis::Delta, -2.0 * p.gamma, 2.0 * p.gamma, 401);
    let all = [
        SweepAxis::Delta,
        SweepAxis::Phi,
        SweepAxis::Kappa,
        SweepAxis::Power,
        SweepAxis::G,
    ];
    let spec = ctx.resolve_1d(&all, fallback)?;
    let axis = axis_of(&spec)?;
    let [c0, c1] = axis_columns(spec.axis);
    let mut doc = TableDoc::new(vec![
        c0,
        c1,
        "coeff_a_rad_s",
        "coeff_b_rad2_s2",
        "a_over_gamma",
        "b_over_gamma2",
        "drive_t",
        "can_fold",
        "beta_fold_minus",
        "beta_fold_plus",
    ]);
    for i in 0..axis.n {
        let v = axis.value(i);
        let pm = with_axis(p, spec.axis, v);
        let c = CubicCoefficients::from_params(&pm)?;
        let (da, db, dt) = c.dimensionless();
        let tp = if c.chi > 0.0 {
            steadystate::turning_points(&c)?
        } else {
            None
        };
        let (bm, bp) = tp.map_or((f64::NAN, f64::NAN), |t| (t.beta_minus, t.beta_plus));
        let (a0, a1) = axis_cells(spec.axis, v, &pm);
        doc.push(vec![
            Cell::F(a0),
            Cell::F(a1),
            Cell::F(c.a),
            Cell::F(c.b),
            Cell::F(da),
            Cell::F(db),
            Cell::F(dt),
            Cell::I(c.can_fold() as i64),
            Cell::F(bm),
            Cell::F(bp),
        ]);
    }
    ctx.emit("coeffs", &doc, json!({}))
}

/// All steady states at the configured operating point, one row per root.
pub fn steady(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let states = steadystate::solve_intensity(p)?;
    let c = CubicCoefficients::from_params(p)?;
    let (da, db, dt) = c.dimensionless();
    let mut doc = TableDoc::new(vec![
        "root",
        "branch",
        "beta",
        "stable",
        "re_alpha1",
        "im_alpha1",
        "re_alpha2",
        "im_alpha2",
        "q",
        "p",
        "residual_rad_s",
    ]);
    for (i, st) in states.iter().enumerate() {
        let s = MeanFieldState::from_steady(st);
        let residual = dynamics::derivatives(&s, p)?.norm_inf();
        doc.push(vec![
            Cell::I(i as i64),
            Cell::from(branch_name(st.branch)),
            Cell::F(st.beta),
            Cell::I(st.stable as i64),
            Cell::F(st.alpha1.re),
            Cell::F(st.alpha1.im),
            Cell::F(st.alpha2.re),
            Cell::F(st.alpha2.im),
            Cell::F(st.q),
            Cell::F(st.p),
            Cell::F(residual),
        ]);
    }
    let derived = json!({
        "n_roots": states.len(),
        "a_over_gamma": da,
        "b_over_gamma2": db,
        "drive_t": dt,
        "can_fold": c.can_fold(),
    });
    ctx.emit("steady", &doc, derived)
}

/// Bistability classification over a (δ, φ) grid.
pub fn region_map(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let g = p.gamma;
    let (dax, pax) = ctx.resolve_map(
        spec_of(SweepAxis::Delta, -0.3 * g, 0.3 * g, 400),
        spec_of(SweepAxis::Phi, -0.03 * PI, 0.005 * PI, 400),
    )?;
    let map = steadystate::bistable_region_map(p, dax, pax)?;
    let mut doc = TableDoc::new(vec![
        "delta_rad_s",
        "delta_over_gamma",
        "phi_rad",
        "phi_over_pi",
        "class_code",
        "class",
    ]);
    let mut counts = [0u64; 3];
    let mut d_lo = f64::INFINITY;
    let mut d_hi = f64::NEG_INFINITY;
    let mut f_lo = f64::INFINITY;
    let mut f_hi = f64::NEG_INFINITY;
    for (ix, iy, cell) in map.iter() {
        let delta = map.x.value(ix);
        let phi = map.y.value(iy);
        let (name, code) = class_name(*cell);
        counts[code as usize] += 1;
        if *cell == RegionClass::BistableActual {
            d_lo = d_lo.min(delta);
            d_hi = d_hi.max(delta);
            f_lo = f_lo.min(phi);
            f_hi = f_hi.max(phi);
        }
        doc.push(vec![
            Cell::F(delta),
            Cell::F(delta / g),
            Cell::F(phi),
            Cell::F(phi / PI),
            Cell::I(code),
            Cell::from(name),
        ]);
    }
    let bbox = if counts[2] > 0 {
        json!({
            "delta_over_gamma": [d_lo / g, d_hi / g],
            "phi_over_pi": [f_lo / PI, f_hi / PI],
        })
    } else {
        serde_json::Value::Null
    };
    let derived = json!({
        "cells_monostable": counts[0],
        "cells_bistable_necessary": counts[1],
        "cells_bistable_actual": counts[2],
        "bistable_actual_bounds": bbox,
    });
    ctx.emit("region-map", &doc, derived)
}

/// Steady-state branches along a 1-D sweep of any operating parameter.
pub fn response(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let fallback = spec_of(SweepAxis::Phi, -0.03 * PI, 0.0, 301);
    let all = [
        SweepAxis::Phi,
        SweepAxis::Delta,
        SweepAxis::Power,
        SweepAxis::Kappa,
        SweepAxis::G,
    ];
    let spec = ctx.resolve_1d(&all, fallback)?;
    let axis = axis_of(&spec)?;
    let [c0, c1] = axis_columns(spec.axis);
    let mut doc = TableDoc::new(vec![
        c0,
        c1,
        "n_roots",
        "beta_lower",
        "beta_middle",
        "beta_upper",
        "stable_lower",
        "stable_middle",
        "stable_upper",
        "status",
    ]);
    for i in 0..axis.n {
        let v = axis.value(i);
        let pm = with_axis(p, spec.axis, v);
        let (a0, a1) = axis_cells(spec.axis, v, &pm);
        let mut beta = [f64::NAN; 3];
        let mut stab = [f64::NAN; 3];
        let (n, status) = match steadystate::solve_intensity(&pm) {
            Ok(states) => {
                for st in &states {
                    let k = match st.branch {
                        Branch::Lower => 0,
                        Branch::Middle => 1,
                        Branch::Upper => 2,
                    };
                    beta[k] = st.beta;
                    stab[k] = st.stable as i64 as f64;
                }
                (states.len() as i64, "ok")
            }
            Err(Error::NoSolution(_)) => (0, "no-solution"),
            Err(e) => return Err(e),
        };
        doc.push(vec![
            Cell::F(a0),
            Cell::F(a1),
            Cell::I(n),
            Cell::F(beta[0]),
            Cell::F(beta[1]),
            Cell::F(beta[2]),
            Cell::F(stab[0]),
            Cell::F(stab[1]),
            Cell::F(stab[2]),
            Cell::from(status),
        ]);
    }
    ctx.emit("response", &doc, json!({}))
}

/// Mean-field trajectory from vacuum or from the lowest stable steady state.
pub fn dynamics_cmd(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let spec = ctx.cfg.dynamics.as_ref().ok_or_else(|| {
        Error::Usage("add a [dynamics] section with t_end_s to the configuration".into())
    })?;
    let s0 = if spec.from_steady {
        let states = steadystate::solve_intensity(p)?;
        let pick = states
            .iter()
            .find(|s| s.stable)
            .or_else(|| states.first())
            .ok_or_else(|| Error::NoSolution("no steady state to start from".into()))?;
        MeanFieldState::from_steady(pick)
    } else {
        MeanFieldState::ZERO
    };
    let opts = IntegratorOptions {
        rtol: spec.tol,
        atol: spec.tol,
        max_samples: spec.max_samples,
        ..IntegratorOptions::default()
    };
    let traj = dynamics::integrate_with(&s0, p, spec.t_end, &opts)?;
    let mut doc = TableDoc::new(vec![
        "t_s",
        "t_gamma",
        "re_alpha1",
        "im_alpha1",
        "beta",
        "q",
        "p",
        "re_alpha2",
        "im_alpha2",
    ]);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        doc.push(vec![
            Cell::F(*t),
            Cell::F(t * p.gamma),
            Cell::F(s.alpha1.re),
            Cell::F(s.alpha1.im),
            Cell::F(s.beta()),
            Cell::F(s.q),
            Cell::F(s.p),
            Cell::F(s.alpha2.re),
            Cell::F(s.alpha2.im),
        ]);
    }
    let (_, last) = traj.last();
    let residual = dynamics::derivatives(last, p)?.norm_inf();
    let derived = json!({
        "samples": traj.times.len(),
        "final_beta": last.beta(),
        "final_residual_rad_s": residual,
    });
    ctx.emit("dynamics", &doc, derived)
}

/// Quasi-static forward-then-backward sweep; branch jumps mark the fold
/// edges and the two legs enclose the hysteresis loop.
pub fn hysteresis(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let spec =
        ctx.cfg.hysteresis.as_ref().ok_or_else(|| {
            Error::Usage("add a [hysteresis] section to the configuration".into())
        })?;
    let steps = ctx.overrides.steps.unwrap_or(spec.steps);
    if steps < 2 {
        return Err(Error::Usage(format!(
            "hysteresis needs at least 2 steps per leg, got {steps}"
        )));
    }
    let forward: Vec<f64> = (0..steps)
        .map(|i| spec.from + (spec.to - spec.from) * i as f64 / (steps - 1) as f64)
        .collect();
    let mut path = forward.clone();
    path.extend(forward[..steps - 1].iter().rev());
    let opts = IntegratorOptions {
        rtol: spec.tol,
        atol: spec.tol,
        settle_max_periods: spec.settle_max_periods,
        ..IntegratorOptions::default()
    };
    let out = dynamics::hysteresis_sweep(p, spec.swept, &path, &opts)?;
    let dimless = |v: f64| match spec.swept {
        SweptParam::Phi => v / PI,
        SweptParam::Delta => v / p.gamma,
    };
    let mut doc = TableDoc::new(vec![
        "step",
        "leg",
        "value",
        "value_dimensionless",
        "beta",
        "branch",
        "jump",
    ]);
    let mut jumps = Vec::new();
    for (i, st) in out.iter().enumerate() {
        let leg = if i < steps { "forward" } else { "backward" };
        if st.jump {
            jumps.push(json!({
                "leg": leg,
                "value": st.value,
                "value_dimensionless": dimless(st.value),
            }));
        }
        doc.push(vec![
            Cell::I(i as i64),
            Cell::from(leg),
            Cell::F(st.value),
            Cell::F(dimless(st.value)),
            Cell::F(st.beta),
            Cell::from(branch_name(st.branch)),
            Cell::I(st.jump as i64),
        ]);
    }
    let derived = json!({
        "loop_area": dynamics::loop_area(&out),
        "jumps": jumps,
    });
    ctx.emit("hysteresis", &doc, derived)
}

fn sense_row(doc: &mut TableDoc, gamma: f64, delta: f64, phi: f64, pt: Option<&SensitivityPoint>) {
    match pt {
        Some(pt) => doc.push(vec![
            Cell::F(delta),
            Cell::F(delta / gamma),
            Cell::F(phi),
            Cell::F(phi / PI),
            Cell::F(pt.beta_g1),
            Cell::F(pt.beta_g2),
            Cell::F(pt.eta),
            Cell::F(1.0 / pt.eta),
            Cell::from(pt.region.to_string().as_str()),
            Cell::from("ok"),
        ]),
        None => doc.push(vec![
            Cell::F(delta),
            Cell::F(delta / gamma),
            Cell::F(phi),
            Cell::F(phi / PI),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::from("none"),
            Cell::from("no-solution"),
        ]),
    }
}

const SENSE_COLUMNS: [&str; 10] = [
    "delta_rad_s",
    "delta_over_gamma",
    "phi_rad",
    "phi_over_pi",
    "beta_g1",
    "beta_g2",
    "eta",
    "inverse_eta",
    "region",
    "status",
];

/// Extrema of a sensing scan: the largest η, and the largest η⁻¹ over
/// region-II points.
struct SenseExtrema {
    eta_max: Option<(f64, f64, f64)>,
    inv_max: Option<(f64, f64, f64)>,
    region_ii: u64,
}

impl SenseExtrema {
    fn new() -> Self {
        Self {
            eta_max: None,
            inv_max: None,
            region_ii: 0,
        }
    }

    fn visit(&mut self, delta: f64, phi: f64, pt: &SensitivityPoint) {
        if pt.eta.is_finite() && self.eta_max.is_none_or(|(m, _, _)| pt.eta > m) {
            self.eta_max = Some((pt.eta, delta, phi));
        }
        if pt.region == Region::II {
            self.region_ii += 1;
            let inv = 1.0 / pt.eta;
            if inv.is_finite() && self.inv_max.is_none_or(|(m, _, _)| inv > m) {
                self.inv_max = Some((inv, delta, phi));
            }
        }
    }

    fn json(&self, gamma: f64) -> serde_json::Value {
        let place = |x: &Option<(f64, f64, f64)>| match x {
            Some((v, d, f)) => json!({
                "value": v,
                "delta_rad_s": d,
                "delta_over_gamma": d / gamma,
                "phi_rad": f,
                "phi_over_pi": f / PI,
            }),
            None => serde_json::Value::Null,
        };
        json!({
            "eta_max": place(&self.eta_max),
            "inverse_eta_max_region_ii": place(&self.inv_max),
            "region_ii_points": self.region_ii,
        })
    }
}

/// Sensitivity ratio η over a (δ, φ) grid for the configured coupling pair.
pub fn sense_map(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let g = p.gamma;
    let (dax, pax) = ctx.resolve_map(
        spec_of(SweepAxis::Delta, -0.15 * g, 0.05 * g, 201),
        spec_of(SweepAxis::Phi, -0.03 * PI, 0.0, 201),
    )?;
    let map = sensing::sensitivity_map(p, ctx.cfg.g1, ctx.cfg.g2, dax, pax)?;
    let mut doc = TableDoc::new(SENSE_COLUMNS.to_vec());
    let mut ext = SenseExtrema::new();
    for (ix, iy, cell) in map.iter() {
        let delta = map.x.value(ix);
        let phi = map.y.value(iy);
        if let Some(pt) = cell {
            ext.visit(delta, phi, pt);
        }
        sense_row(&mut doc, g, delta, phi, cell.as_ref());
    }
    let summary = ext.json(g);
    ctx.emit("sense-map", &doc, json!({}))?;
    ctx.emit_summary("sense-map", &summary)
}

/// Sensitivity ratio η along one axis (φ at fixed δ, or δ at fixed φ).
/// Detuning cuts also report the operating bandwidth and the optimal δ;
/// phase cuts report the region-II window.
pub fn sense_cut(ctx: &Ctx) -> Result<()> {
    let p = ctx.params();
    let fallback = spec_of(SweepAxis::Phi, -0.03 * PI, 0.0, 301);
    let spec = ctx.resolve_1d(&[SweepAxis::Phi, SweepAxis::Delta], fallback)?;
    let axis = axis_of(&spec)?;
    let (g1, g2) = (ctx.cfg.g1, ctx.cfg.g2);
    let mut doc = TableDoc::new(SENSE_COLUMNS.to_vec());
    let mut ext = SenseExtrema::new();
    let mut ii_window: Option<(f64, f64)> = None;
    for i in 0..axis.n {
        let v = axis.value(i);
        let pm = with_axis(p, spec.axis, v);
        let pt = match sensing::sensitivity(&pm, g1, g2) {
            Ok(pt) => Some(pt),
            Err(Error::NoSolution(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(pt) = &pt {
            ext.visit(pm.delta, pm.phi, pt);
            if pt.region == Region::II && spec.axis == SweepAxis::Phi {
                ii_window = Some(match ii_window {
                    Some((lo, hi)) => (lo.min(pm.phi), hi.max(pm.phi)),
                    None => (pm.phi, pm.phi),
                });
            }
        }
        sense_row(&mut doc, p.gamma, pm.delta, pm.phi, pt.as_ref());
    }
    let mut summary = ext.json(p.gamma);
    let obj = summary.as_object_mut().expect("summary object");
    match spec.axis {
        SweepAxis::Delta => {
            let drop = ctx.overrides.drop.unwrap_or(0.1);
            let band = match sensing::bandwidth(p, g1, g2, drop, axis) {
                Ok(b) => json!({
                    "drop": drop,
                    "width_rad_s": b.width,
                    "width_over_gamma": b.width / p.gamma,
                    "lo_rad_s": b.lo,
                    "hi_rad_s": b.hi,
                    "peak_delta_rad_s": b.peak_delta,
                    "peak_delta_over_gamma": b.peak_delta / p.gamma,
                    "peak_inverse_eta": b.peak_inverse_eta,
                }),
                Err(Error::UndefinedBandwidth(_)) | Err(Error::NoSolution(_)) => {
                    serde_json::Value::Null
                }
                Err(e) => return Err(e),
            };
            obj.insert("bandwidth".into(), band);
            let opt = match sensing::optimal_detuning(p, g1, g2, axis) {
                Ok(o) => json!({
                    "delta_opt_rad_s": o.delta_opt,
                    "delta_opt_over_gamma": o.delta_opt / p.gamma,
                    "eta_max": o.eta_max,
                    "degenerate": o.degenerate,
                }),
                Err(Error::NoSolution(_)) => serde_json::Value::Null,
                Err(e) => return Err(e),
            };
            obj.insert("optimal_detuning".into(), opt);
        }
        SweepAxis::Phi => {
            let window = match ii_window {
                Some((lo, hi)) => json!({
                    "phi_lo_rad": lo,
                    "phi_hi_rad": hi,
                    "phi_lo_over_pi": lo / PI,
                    "phi_hi_over_pi": hi / PI,
                }),
                None => serde_json::Value::Null,
            };
            obj.insert("region_ii_phi_window".into(), window);
        }
        _ => unreachable!("sense-cut axis is phi or delta"),
    }
    ctx.emit("sense-cut", &doc, json!({}))?;
    ctx.emit_summary("sense-cut", &summary)
}

/// Collective optomechanical coupling of a levitated emitter ensemble.
pub fn nanosphere_g(ctx: &Ctx) -> Result<()> {
    let ns =
        ctx.cfg.nanosphere.as_ref().ok_or_else(|| {
            Error::Usage("add a [nanosphere] section to the configuration".into())
        })?;
    let g = nanosphere_coupling(ns)?;
    let mut doc = TableDoc::new(vec![
        "n",
        "p_e",
        "omega_c_rad_s",
        "delta_c_rad_s",
        "gamma_c_per_m",
        "q_zpf_m",
        "g_rad_s",
        "g_abs_over_2pi_hz",
    ]);
    doc.push(vec![
        Cell::I(ns.n as i64),
        Cell::F(ns.p_e),
        Cell::F(ns.omega_c),
        Cell::F(ns.delta_c),
        Cell::F(ns.gamma_c),
        Cell::F(ns.q_zpf),
        Cell::F(g),
        Cell::F(g.abs() / TAU),
    ]);
    ctx.emit("nanosphere-g", &doc, json!({ "g_rad_s": g }))
}
