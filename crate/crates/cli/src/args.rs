use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Chirped adiabatic rapid passage in a driven two-level system.
///
/// Units: time in ms, angular frequencies in rad/ms, sweep rates in rad/ms².
#[derive(Debug, Parser)]
#[command(name = "arpsim", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one sweep from the ground state.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Maximum transfer over an (ω₁, R) grid.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Extract the optimal ridge from contour.csv and fit R = k·ω₁².
    #[command(args_override_self = true, allow_negative_numbers = true)]
    RidgeFit(RidgeFitArgs),
    /// Evaluate the phenomenological transfer model.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Model(ModelArgs),
    /// Maximum transfer against ω₁ for several τc, with the model overlay.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Family(FamilyArgs),
    /// Write gnuplot scripts for existing CSV output.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Rect,
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailDriveArg {
    Off,
    Continued,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    Time,
    Omega1,
}

/// `lo:hi:n`, `n` evenly spaced values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err("expected lo:hi:n".into());
        };
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
        let n: usize = n.trim().parse().map_err(|e| format!("bad count: {e}"))?;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err("bounds must be finite".into());
        }
        if n == 0 {
            return Err("count must be at least 1".into());
        }
        if n > 1 && hi <= lo {
            return Err("upper bound must exceed lower bound".into());
        }
        Ok(Self { lo, hi, n })
    }
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        arpsim::sweeps::linspace(self.lo, self.hi, self.n)
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file; keys are long flag names. Flags given on the
    /// command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhysicsArgs {
    /// Pulse envelope; a Gaussian has the same area as the rectangle of
    /// height ω₁.
    #[arg(long, value_enum)]
    pub profile: ProfileArg,
    /// Sweep half-width δω in rad/ms; detuning runs from −δω to +δω.
    #[arg(long = "delta-omega")]
    pub delta_omega: f64,
    /// Bath correlation time τc in ms; 0 turns off drive-induced dissipation.
    #[arg(long)]
    pub tauc: f64,
    /// Longitudinal relaxation time in ms (default: none).
    #[arg(long)]
    pub t1: Option<f64>,
    /// Transverse relaxation time in ms (default: none).
    #[arg(long)]
    pub t2: Option<f64>,
    /// Equilibrium polarization, in [−1, 1]; only used with --t1.
    #[arg(long, default_value_t = 1.0)]
    pub m0: f64,
    /// Gaussian amplitude at the pulse edges relative to its peak.
    #[arg(long = "cutoff-fraction", default_value_t = arpsim::types::DEFAULT_CUTOFF_FRACTION)]
    pub cutoff_fraction: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TimingArgs {
    /// Sweep duration T in ms.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Sweep rate R = 2δω/T in rad/ms².
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Number of output samples, endpoints included.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long = "rel-tol", default_value_t = 1e-9)]
    pub rel_tol: f64,
    /// Absolute tolerance of the adaptive integrator.
    #[arg(long = "abs-tol", default_value_t = 1e-11)]
    pub abs_tol: f64,
    /// Largest step in ms; a nutation-based cap may lower it further.
    #[arg(long = "max-step", default_value_t = 1.0)]
    pub max_step: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Drive amplitude ω₁ in rad/ms.
    #[arg(long)]
    pub omega1: f64,
    #[command(flatten)]
    pub timing: TimingArgs,
    /// Extra evolution after the sweep, in ms.
    #[arg(long, default_value_t = 0.0)]
    pub tail: f64,
    /// Whether the drive stays on during the tail.
    #[arg(long = "tail-drive", value_enum, default_value_t = TailDriveArg::Off)]
    pub tail_drive: TailDriveArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// ω₁ axis as lo:hi:n, rad/ms.
    #[arg(long = "omega1-range", default_value = "0.1:5:50")]
    pub omega1_range: Range,
    /// R axis as lo:hi:n, rad/ms².
    #[arg(long = "rate-range", default_value = "0.1:5:50")]
    pub rate_range: Range,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RidgeFitArgs {
    /// contour.csv written by `sweep`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Sweep half-width δω in rad/ms.
    #[arg(long = "delta-omega")]
    pub delta_omega: f64,
    /// Drive amplitude ω₁ in rad/ms.
    #[arg(long)]
    pub omega1: f64,
    #[command(flatten)]
    pub timing: TimingArgs,
    /// Bath correlation time τc in ms; must be positive.
    #[arg(long)]
    pub tauc: f64,
    /// Scan 𝒫(t) over time or the optimum p(ω₁) over amplitude.
    #[arg(long, value_enum)]
    pub scan: ScanArg,
    /// Scan axis as lo:hi:n (default 0:T:2001 for time, 0.01:5:500 for ω₁).
    #[arg(long)]
    pub range: Option<Range>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Sweep half-width δω in rad/ms.
    #[arg(long = "delta-omega", default_value_t = 10.0)]
    pub delta_omega: f64,
    /// Sweep rate R in rad/ms².
    #[arg(long, default_value_t = 0.1)]
    pub rate: f64,
    /// ω₁ axis as lo:hi:n, rad/ms.
    #[arg(long = "omega1-range", default_value = "0.02:1.5:75")]
    pub omega1_range: Range,
    /// Comma-separated correlation times in ms.
    #[arg(long = "tauc-list", value_delimiter = ',', default_value = "0,0.005,0.01,0.02,0.05")]
    pub tauc_list: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// trajectory.csv from `simulate`: population and Bloch scripts.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// contour.csv from `sweep`: filled contour script.
    #[arg(long)]
    pub contour: Option<PathBuf>,
    /// ridge.csv from `ridge-fit`: ridge points and fitted parabola on the
    /// contour.
    #[arg(long)]
    pub ridge: Option<PathBuf>,
    /// family.csv from `family`: one curve per τc.
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", n + 1));
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key '{key}'", n + 1));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn has_flag(args: &[OsString], flag: &str) -> bool {
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&format!("{flag}="))
    })
}

/// Splices config-file values in right after the subcommand, so anything on
/// the command line overrides them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let text = read_input(&path, "--config")?;
    let pairs = parse_config(&text).map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))?;
    // Duration and rate are mutually exclusive: one given on the command
    // line replaces either from the file.
    let cli_timing = has_flag(&args, "--duration") || has_flag(&args, "--rate");
    let mut out: Vec<OsString> = args[..2].to_vec();
    for (key, value) in pairs {
        if cli_timing && (key == "duration" || key == "rate") {
            continue;
        }
        out.push(format!("--{key}").into());
        out.push(value.into());
    }
    out.extend(args[2..].iter().cloned());
    Ok(out)
}

pub fn read_input(path: &Path, flag: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{flag} {}: {e}", path.display())))
}
