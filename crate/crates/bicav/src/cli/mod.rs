//! Command-line front end.
//!
//! Every subcommand reads one TOML configuration file (`--config`), applies
//! any command-line overrides, and writes its artifacts into `--out`. Output
//! tables are byte-identical across runs with the same inputs; timestamps
//! appear only in the `.meta.json` sidecars.

pub mod config;
pub mod output;

mod commands;

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use commands::{Ctx, Overrides};
use output::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

/// Coupled-cavity pair with a shared waveguide: spectra, steady states,
/// dynamics, and sensitivity maps.
#[derive(Debug, Parser)]
#[command(name = "bicav", version, about)]
struct Cli {
    /// TOML run configuration (required by every subcommand).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory for tables and sidecars.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out: PathBuf,

    /// Rayon worker threads; overrides the BICAV_THREADS variable.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,

    /// Override the operating phase, in units of pi.
    #[arg(long, global = true, value_name = "PHI/PI", allow_hyphen_values = true)]
    phi: Option<f64>,

    /// Override the operating detuning, in units of the waveguide rate.
    #[arg(
        long,
        global = true,
        value_name = "DELTA/GAMMA",
        allow_hyphen_values = true
    )]
    delta: Option<f64>,

    /// Override the detuning sweep range, as "lo,hi" in units of the
    /// waveguide rate.
    #[arg(long, global = true, value_name = "LO,HI", allow_hyphen_values = true)]
    delta_range: Option<String>,

    /// Override the phase sweep range, as "lo,hi" in units of pi.
    #[arg(long, global = true, value_name = "LO,HI", allow_hyphen_values = true)]
    phi_range: Option<String>,

    /// Override the sweep resolution: "n" for 1-D sweeps, "nx,ny" for maps
    /// (detuning axis first).
    #[arg(long, global = true, value_name = "N[,M]")]
    grid: Option<String>,

    /// Override the hysteresis step count per leg.
    #[arg(long, global = true, value_name = "N")]
    steps: Option<usize>,

    /// Relative drop defining the sensing bandwidth window, in (0, 1).
    #[arg(long, global = true, value_name = "FRAC")]
    drop: Option<f64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Complex eigenvalue pair along a detuning or phase sweep.
    Eigen,
    /// Steady-state cubic coefficients and fold window along a sweep.
    Coeffs,
    /// All steady states at the configured operating point.
    Steady,
    /// Bistability classification over a detuning-phase grid.
    RegionMap,
    /// Steady-state branches along a one-parameter sweep.
    Response,
    /// Mean-field trajectory from vacuum or from a steady state.
    Dynamics,
    /// Forward-backward parameter sweep exposing the hysteresis loop.
    Hysteresis,
    /// Sensitivity ratio over a detuning-phase grid.
    SenseMap,
    /// Sensitivity ratio along one axis, with bandwidth and optimum.
    SenseCut,
    /// Collective coupling of a levitated emitter ensemble.
    NanosphereG,
}

/// Parses the process arguments and executes the selected subcommand.
pub fn run() -> Result<()> {
    run_cli(Cli::parse())
}

fn run_cli(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Usage("--config <FILE> is required; see `bicav --help`".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = config::parse_config(&text)?;
    if let Some(v) = cli.phi {
        cfg.params.phi = v * PI;
    }
    if let Some(v) = cli.delta {
        cfg.params.delta = v * cfg.params.gamma;
    }
    if cli.phi.is_some() || cli.delta.is_some() {
        cfg.params
            .validate()
            .map_err(|e| Error::Usage(format!("operating-point override: {e}")))?;
    }
    let overrides = Overrides {
        delta_range: parse_pair(cli.delta_range.as_deref(), "--delta-range")?,
        phi_range: parse_pair(cli.phi_range.as_deref(), "--phi-range")?,
        grid: parse_grid(cli.grid.as_deref())?,
        steps: cli.steps,
        drop: cli.drop,
    };
    fs::create_dir_all(&cli.out)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", cli.out.display())))?;
    let ctx = Ctx {
        cfg: &cfg,
        out: &cli.out,
        format: match cli.format {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        },
        overrides,
    };
    match cli.cmd {
        Cmd::Eigen => commands::eigen(&ctx),
        Cmd::Coeffs => commands::coeffs(&ctx),
        Cmd::Steady => commands::steady(&ctx),
        Cmd::RegionMap => commands::region_map(&ctx),
        Cmd::Response => commands::response(&ctx),
        Cmd::Dynamics => commands::dynamics_cmd(&ctx),
        Cmd::Hysteresis => commands::hysteresis(&ctx),
        Cmd::SenseMap => commands::sense_map(&ctx),
        Cmd::SenseCut => commands::sense_cut(&ctx),
        Cmd::NanosphereG => commands::nanosphere_g(&ctx),
    }
}

/// Installs the global worker pool. The `--threads` flag wins over the
/// BICAV_THREADS variable; with neither, rayon picks its own default. A
/// repeated install attempt (e.g. under a test harness) is harmless.
fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("BICAV_THREADS") {
            Ok(s) => Some(s.parse::<usize>().map_err(|_| {
                Error::Usage(format!(
                    "BICAV_THREADS must be a positive integer, got '{s}'"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Usage("thread count must be at least 1".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn parse_pair(s: Option<&str>, flag: &str) -> Result<Option<(f64, f64)>> {
    let Some(s) = s else { return Ok(None) };
    let parts: Vec<&str> = s.split(',').collect();
    let err = || Error::Usage(format!("{flag} expects 'lo,hi', got '{s}'"));
    if parts.len() != 2 {
        return Err(err());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| err())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Usage(format!(
            "{flag} needs finite lo < hi, got '{s}'"
        )));
    }
    Ok(Some((lo, hi)))
}

fn parse_grid(s: Option<&str>) -> Result<Option<(usize, Option<usize>)>> {
    let Some(s) = s else { return Ok(None) };
    let err = || Error::Usage(format!("--grid expects 'n' or 'nx,ny', got '{s}'"));
    let parts: Vec<&str> = s.split(',').collect();
    let parsed = match parts.as_slice() {
        [n] => (n.trim().parse::<usize>().map_err(|_| err())?, None),
        [nx, ny] => (
            nx.trim().parse::<usize>().map_err(|_| err())?,
            Some(ny.trim().parse::<usize>().map_err(|_| err())?),
        ),
        _ => return Err(err()),
    };
    if parsed.0 < 2 || parsed.1.is_some_and(|n| n < 2) {
        return Err(Error::Usage("grid axes need at least 2 points".into()));
    }
    Ok(Some(parsed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parsing_accepts_signed_ranges() {
        assert_eq!(
            parse_pair(Some("-0.3, 0.1"), "--delta-range").unwrap(),
            Some((-0.3, 0.1))
        );
        assert!(parse_pair(Some("0.3,0.1"), "--delta-range").is_err());
        assert!(parse_pair(Some("1"), "--delta-range").is_err());
        assert!(parse_pair(Some("a,b"), "--delta-range").is_err());
        assert_eq!(parse_pair(None, "--delta-range").unwrap(), None);
    }

    #[test]
    fn grid_parsing_accepts_one_or_two_counts() {
        assert_eq!(parse_grid(Some("61")).unwrap(), Some((61, None)));
        assert_eq!(parse_grid(Some("40,50")).unwrap(), Some((40, Some(50))));
        assert!(parse_grid(Some("1")).is_err());
        assert!(parse_grid(Some("a")).is_err());
        assert!(parse_grid(Some("4,5,6")).is_err());
    }

    #[test]
    fn command_line_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
