//! TOML run-configuration parsing with explicit unit suffixes.
//!
//! Every rate-like key must carry a unit suffix (`*_hz` is multiplied by 2π,
//! `*_rad_s` is taken as-is); angles use `*_pi` or `*_rad`. A bare key
//! (`delta = 0`) is accepted only for an exact zero, where units are moot.
//! Unknown keys, unit-less rates, and invariant violations are reported with
//! the offending key and its line number.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::dynamics::SweptParam;
use crate::error::{Error, Result};
use crate::params::{NanosphereParams, PhysicalParams};

/// Everything a run needs, resolved to SI radian units.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: PhysicalParams,
    /// Smaller coupling of the sensing pair (rad/s).
    pub g1: f64,
    /// Larger coupling of the sensing pair (rad/s).
    pub g2: f64,
    /// Primary sweep axis.
    pub sweep: Option<SweepSpec>,
    /// Secondary sweep axis for map subcommands.
    pub sweep2: Option<SweepSpec>,
    pub dynamics: Option<DynamicsSpec>,
    pub hysteresis: Option<HysteresisSpec>,
    pub nanosphere: Option<NanosphereParams>,
    /// Significant digits in emitted floats.
    pub precision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    Phi,
    Delta,
    Power,
    Kappa,
    G,
}

/// One sweep axis, already in absolute units (rad, rad/s, or W).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DynamicsSpec {
    /// Integration horizon (s).
    pub t_end: f64,
    pub tol: f64,
    /// Start from the lowest stable steady state instead of vacuum.
    pub from_steady: bool,
    pub max_samples: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HysteresisSpec {
    pub swept: SweptParam,
    /// Sweep start (rad for φ, rad/s for δ).
    pub from: f64,
    pub to: f64,
    /// Points per leg; the full path is forward plus reversed (2·steps − 1).
    pub steps: usize,
    pub settle_max_periods: f64,
    pub tol: f64,
}

const REQUIRED_PARAMS: &str = "gamma_hz, kappa1_hz, kappa2_hz, delta (or delta_hz), \
phi_pi (or phi_rad), omega_m_hz, gamma_m_hz, g_hz, p_in_w, lambda_d_m";

const SECTIONS: [&str; 8] = [
    "params",
    "pair",
    "sweep",
    "sweep2",
    "dynamics",
    "hysteresis",
    "nanosphere",
    "output",
];

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("invalid config syntax: {e}")))?;
    for key in table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown section or key '{key}'{}; expected sections: {}",
                line_note(text, "", key),
                SECTIONS.join(", ")
            )));
        }
    }
    let params_table = match table.get("params") {
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(Error::Config("'params' must be a [params] section".into())),
        None => {
            return Err(Error::Config(format!(
                "config must define a [params] section; required keys: {REQUIRED_PARAMS}"
            )))
        }
    };

    let mut sec = Section::new("params", params_table, text);
    let gamma = sec.require_rate("gamma")?;
    let kappa1 = sec.require_rate("kappa1")?;
    let kappa2 = sec.require_rate("kappa2")?;
    let delta = sec.require_rate("delta")?;
    let phi = sec.require_angle("phi")?;
    let omega_m = sec.require_rate("omega_m")?;
    let gamma_m = sec.require_rate("gamma_m")?;
    let g = sec.require_rate("g")?;
    let p_in = sec.require_number("p_in_w")?;
    let lambda_d = sec.require_number("lambda_d_m")?;
    sec.finish()?;
    let params = PhysicalParams {
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
    params
        .validate()
        .map_err(|e| Error::Config(format!("invalid [params]: {e}")))?;

    let (g1, g2) = match section(&table, "pair")? {
        Some(t) => {
            let mut sec = Section::new("pair", t, text);
            let g1 = sec.rate("g1")?.unwrap_or(TAU * 1.0);
            let g2 = sec.rate("g2")?.unwrap_or(TAU * 3.0);
            sec.finish()?;
            (g1, g2)
        }
        None => (TAU * 1.0, TAU * 3.0),
    };

    let sweep = match section(&table, "sweep")? {
        Some(t) => Some(parse_sweep("sweep", t, text, gamma)?),
        None => None,
    };
    let sweep2 = match section(&table, "sweep2")? {
        Some(t) => Some(parse_sweep("sweep2", t, text, gamma)?),
        None => None,
    };

    let dynamics = match section(&table, "dynamics")? {
        Some(t) => {
            let mut sec = Section::new("dynamics", t, text);
            let t_end = sec.require_number("t_end_s")?;
            let tol = sec.number("tol")?.unwrap_or(1e-8);
            let from_steady = match sec.string("initial")?.as_deref() {
                None | Some("vacuum") => false,
                Some("steady") => true,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "key 'initial' in [dynamics]{} must be \"vacuum\" or \"steady\", got \"{other}\"",
                        line_note(text, "dynamics", "initial")
                    )))
                }
            };
            let max_samples = sec.usize_("max_samples")?.unwrap_or(100_000);
            sec.finish()?;
            if !(t_end > 0.0) || !t_end.is_finite() {
                return Err(Error::Config(format!(
                    "key 't_end_s' in [dynamics]{} must be positive and finite",
                    line_note(text, "dynamics", "t_end_s")
                )));
            }
            Some(DynamicsSpec {
                t_end,
                tol,
                from_steady,
                max_samples,
            })
        }
        None => None,
    };

    let hysteresis = match section(&table, "hysteresis")? {
        Some(t) => {
            let mut sec = Section::new("hysteresis", t, text);
            let swept = match sec.string("swept")?.as_deref() {
                None | Some("phi") => SweptParam::Phi,
                Some("delta") => SweptParam::Delta,
                Some(other) => {
                    return Err(Error::Config(format!(
                    "key 'swept' in [hysteresis]{} must be \"phi\" or \"delta\", got \"{other}\"",
                    line_note(text, "hysteresis", "swept")
                )))
                }
            };
            let (from, to) = match swept {
                SweptParam::Phi => (sec.require_angle("from")?, sec.require_angle("to")?),
                SweptParam::Delta => (
                    sec.require_scaled_rate("from", gamma)?,
                    sec.require_scaled_rate("to", gamma)?,
                ),
            };
            let steps = sec.usize_("steps")?.unwrap_or(41);
            let settle_max_periods = sec.number("settle_max_periods")?.unwrap_or(10_000.0);
            let tol = sec.number("tol")?.unwrap_or(1e-8);
            sec.finish()?;
            if steps < 2 {
                return Err(Error::Config(format!(
                    "key 'steps' in [hysteresis]{} must be at least 2",
                    line_note(text, "hysteresis", "steps")
                )));
            }
            Some(HysteresisSpec {
                swept,
                from,
                to,
                steps,
                settle_max_periods,
                tol,
            })
        }
        None => None,
    };

    let nanosphere = match section(&table, "nanosphere")? {
        Some(t) => {
            let mut sec = Section::new("nanosphere", t, text);
            let n = sec.require_usize("n")? as u64;
            let p_e = sec.require_number("p_e")?;
            let omega_c = sec.require_rate("omega_c")?;
            let delta_c = sec.require_rate("delta_c")?;
            let gamma_c = sec.require_number("gamma_c_per_m")?;
            let q_zpf = sec.require_number("q_zpf_m")?;
            sec.finish()?;
            let ns = NanosphereParams {
                n,
                p_e,
                omega_c,
                delta_c,
                gamma_c,
                q_zpf,
            };
            ns.validate()
                .map_err(|e| Error::Config(format!("invalid [nanosphere]: {e}")))?;
            Some(ns)
        }
        None => None,
    };

    let precision = match section(&table, "output")? {
        Some(t) => {
            let mut sec = Section::new("output", t, text);
            let precision = sec.usize_("precision")?.unwrap_or(12);
            sec.finish()?;
            if !(3..=17).contains(&precision) {
                return Err(Error::Config(format!(
                    "key 'precision' in [output]{} must lie in 3..=17",
                    line_note(text, "output", "precision")
                )));
            }
            precision
        }
        None => 12,
    };

    Ok(RunConfig {
        params,
        g1,
        g2,
        sweep,
        sweep2,
        dynamics,
        hysteresis,
        nanosphere,
        precision,
    })
}

fn section<'a>(table: &'a toml::Table, name: &str) -> Result<Option<&'a toml::Table>> {
    match table.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(Error::Config(format!(
            "'{name}' must be a [{name}] section"
        ))),
    }
}

fn parse_sweep(name: &str, t: &toml::Table, text: &str, gamma: f64) -> Result<SweepSpec> {
    let mut sec = Section::new(name, t, text);
    let axis = match sec.string("axis")?.as_deref() {
        Some("phi") => SweepAxis::Phi,
        Some("delta") => SweepAxis::Delta,
        Some("power") => SweepAxis::Power,
        Some("kappa") => SweepAxis::Kappa,
        Some("g") => SweepAxis::G,
        Some(other) => {
            return Err(Error::Config(format!(
            "key 'axis' in [{name}]{} must be one of phi, delta, power, kappa, g; got \"{other}\"",
            line_note(text, name, "axis")
        )))
        }
        None => {
            return Err(Error::Config(format!(
                "[{name}] is missing required key 'axis' (one of phi, delta, power, kappa, g)"
            )))
        }
    };
    let (start, stop) = match axis {
        SweepAxis::Phi => sec.require_angle_range("range")?,
        SweepAxis::Delta | SweepAxis::Kappa | SweepAxis::G => {
            sec.require_rate_range("range", gamma)?
        }
        SweepAxis::Power => {
            let r = sec.require_number_pair("range_w")?;
            (r.0, r.1)
        }
    };
    let points = sec.require_usize("points")?;
    sec.finish()?;
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(Error::Config(format!(
            "[{name}] range must be finite and ascending, got [{start}, {stop}]"
        )));
    }
    if points < 2 {
        return Err(Error::Config(format!(
            "[{name}] needs at least 2 points, got {points}"
        )));
    }
    Ok(SweepSpec {
        axis,
        start,
        stop,
        points,
    })
}

/// One config section with used-key tracking; leftover keys are unknown.
struct Section<'a> {
    name: &'a str,
    table: &'a toml::Table,
    text: &'a str,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, table: &'a toml::Table, text: &'a str) -> Self {
        Self {
            name,
            table,
            text,
            used: BTreeSet::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a toml::Value> {
        let v = self.table.get(key);
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Error::Config(format!(
                "key '{key}' in [{}]{} must be a number, got {}",
                self.name,
                line_note(self.text, self.name, key),
                v.type_str()
            ))),
        }
    }

    fn require_number(&mut self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| {
            Error::Config(format!("[{}] is missing required key '{key}'", self.name))
        })
    }

    fn usize_(&mut self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(Error::Config(format!(
                "key '{key}' in [{}]{} must be a non-negative integer, got {}",
                self.name,
                line_note(self.text, self.name, key),
                v.type_str()
            ))),
        }
    }

    fn require_usize(&mut self, key: &str) -> Result<usize> {
        self.usize_(key)?.ok_or_else(|| {
            Error::Config(format!("[{}] is missing required key '{key}'", self.name))
        })
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Error::Config(format!(
                "key '{key}' in [{}]{} must be a string, got {}",
                self.name,
                line_note(self.text, self.name, key),
                v.type_str()
            ))),
        }
    }

    fn number_pair(&mut self, key: &str) -> Result<Option<(f64, f64)>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) if a.len() == 2 => {
                let get = |v: &toml::Value| match v {
                    toml::Value::Float(f) => Some(*f),
                    toml::Value::Integer(i) => Some(*i as f64),
                    _ => None,
                };
                match (get(&a[0]), get(&a[1])) {
                    (Some(x), Some(y)) => Ok(Some((x, y))),
                    _ => Err(self.pair_error(key)),
                }
            }
            Some(_) => Err(self.pair_error(key)),
        }
    }

    fn pair_error(&self, key: &str) -> Error {
        Error::Config(format!(
            "key '{key}' in [{}]{} must be a 2-element numeric array [lo, hi]",
            self.name,
            line_note(self.text, self.name, key)
        ))
    }

    fn require_number_pair(&mut self, key: &str) -> Result<(f64, f64)> {
        self.number_pair(key)?.ok_or_else(|| {
            Error::Config(format!("[{}] is missing required key '{key}'", self.name))
        })
    }

    /// Angular rate: `<base>_hz` (×2π) or `<base>_rad_s`; bare `<base>` only
    /// for exact zero.
    fn rate(&mut self, base: &str) -> Result<Option<f64>> {
        let hz = self.number(&format!("{base}_hz"))?;
        let rs = self.number(&format!("{base}_rad_s"))?;
        let bare = self.number(base)?;
        self.combine(
            base,
            &format!("{base}_hz' or '{base}_rad_s"),
            hz.map(|v| TAU * v),
            rs,
            bare,
        )
    }

    /// Rate that may also be given in units of Γ via `<base>_gamma`.
    fn scaled_rate(&mut self, base: &str, gamma: f64) -> Result<Option<f64>> {
        let in_gamma = self.number(&format!("{base}_gamma"))?.map(|v| v * gamma);
        let plain = self.rate(base)?;
        match (in_gamma, plain) {
            (Some(_), Some(_)) => Err(self.conflict(base)),
            (Some(v), None) | (None, Some(v)) => Ok(Some(v)),
            (None, None) => Ok(None),
        }
    }

    fn require_scaled_rate(&mut self, base: &str, gamma: f64) -> Result<f64> {
        self.scaled_rate(base, gamma)?.ok_or_else(|| {
            Error::Config(format!(
                "[{}] is missing required key '{base}_gamma' (or '{base}_hz'/'{base}_rad_s')",
                self.name
            ))
        })
    }

    /// Angle: `<base>_pi` (×π) or `<base>_rad`; bare `<base>` only for zero.
    fn angle(&mut self, base: &str) -> Result<Option<f64>> {
        let in_pi = self.number(&format!("{base}_pi"))?;
        let rad = self.number(&format!("{base}_rad"))?;
        let bare = self.number(base)?;
        self.combine(
            base,
            &format!("{base}_pi' or '{base}_rad"),
            in_pi.map(|v| PI * v),
            rad,
            bare,
        )
    }

    fn combine(
        &self,
        base: &str,
        variants: &str,
        a: Option<f64>,
        b: Option<f64>,
        bare: Option<f64>,
    ) -> Result<Option<f64>> {
        match (a, b, bare) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) | (None, Some(_), Some(_)) => {
                Err(self.conflict(base))
            }
            (Some(v), None, None) | (None, Some(v), None) => Ok(Some(v)),
            (None, None, Some(v)) => {
                if v == 0.0 {
                    Ok(Some(0.0))
                } else {
                    Err(Error::Config(format!(
                        "key '{base}' in [{}]{} needs a unit suffix ('{variants}'); the bare \
                         form is allowed only for exact 0",
                        self.name,
                        line_note(self.text, self.name, base)
                    )))
                }
            }
            (None, None, None) => Ok(None),
        }
    }

    fn conflict(&self, base: &str) -> Error {
        Error::Config(format!(
            "conflicting unit variants for '{base}' in [{}]: give exactly one",
            self.name
        ))
    }

    fn require_rate(&mut self, base: &str) -> Result<f64> {
        self.rate(base)?.ok_or_else(|| {
            Error::Config(format!(
                "[{}] is missing required key '{base}_hz' (or '{base}_rad_s')",
                self.name
            ))
        })
    }

    fn require_angle(&mut self, base: &str) -> Result<f64> {
        self.angle(base)?.ok_or_else(|| {
            Error::Config(format!(
                "[{}] is missing required key '{base}_pi' (or '{base}_rad')",
                self.name
            ))
        })
    }

    /// Range pair with angle units: `<base>_pi` or `<base>_rad`.
    fn require_angle_range(&mut self, base: &str) -> Result<(f64, f64)> {
        let in_pi = self.number_pair(&format!("{base}_pi"))?;
        let rad = self.number_pair(&format!("{base}_rad"))?;
        match (in_pi, rad) {
            (Some(_), Some(_)) => Err(self.conflict(base)),
            (Some((a, b)), None) => Ok((a * PI, b * PI)),
            (None, Some(r)) => Ok(r),
            (None, None) => Err(Error::Config(format!(
                "[{}] is missing required key '{base}_pi' (or '{base}_rad')",
                self.name
            ))),
        }
    }

    /// Range pair with rate units: `<base>_gamma`, `<base>_hz`, or
    /// `<base>_rad_s`.
    fn require_rate_range(&mut self, base: &str, gamma: f64) -> Result<(f64, f64)> {
        let in_gamma = self.number_pair(&format!("{base}_gamma"))?;
        let hz = self.number_pair(&format!("{base}_hz"))?;
        let rs = self.number_pair(&format!("{base}_rad_s"))?;
        match (in_gamma, hz, rs) {
            (Some((a, b)), None, None) => Ok((a * gamma, b * gamma)),
            (None, Some((a, b)), None) => Ok((a * TAU, b * TAU)),
            (None, None, Some(r)) => Ok(r),
            (None, None, None) => Err(Error::Config(format!(
                "[{}] is missing required key '{base}_gamma' (or '{base}_hz'/'{base}_rad_s')",
                self.name
            ))),
            _ => Err(self.conflict(base)),
        }
    }

    /// Errors on the first (lowest-line) unknown key.
    fn finish(self) -> Result<()> {
        let mut unknown: Vec<(usize, &String)> = self
            .table
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(|k| (line_of(self.text, self.name, k), k))
            .collect();
        unknown.sort();
        if let Some((line, key)) = unknown.first() {
            let at = if *line > 0 {
                format!(" (line {line})")
            } else {
                String::new()
            };
            return Err(Error::Config(format!(
                "unknown key '{key}' in [{}]{at}",
                self.name
            )));
        }
        Ok(())
    }
}

/// 1-based line of `key` inside `[section]` (0 when not found; section ""
/// means top level).
fn line_of(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('[') {
            current = rest.split(']').next().unwrap_or("").trim().to_string();
            continue;
        }
        if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return i + 1;
                }
            }
        }
    }
    0
}

fn line_note(text: &str, section: &str, key: &str) -> String {
    let line = line_of(text, section, key);
    if line > 0 {
        format!(" (line {line})")
    } else {
        String::new()
    }
}
