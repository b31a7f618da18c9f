use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "xyent", version, about = "Block entanglement entropy of the XY spin chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the entropy at one parameter point (JSON on stdout).
    Entropy(EntropyArgs),
    /// Evaluate a rectangular parameter grid into a CSV file.
    Scan(ScanArgs),
    /// Pair the finite-block spectrum with the limiting ladder (CSV on stdout).
    Spectrum(SpectrumArgs),
    /// Run the determinant and asymptotic self-checks.
    Verify(VerifyArgs),
    /// Fit the logarithmic divergence near a critical line (JSON on stdout).
    CriticalFit(CriticalFitArgs),
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h: f64,
    /// Block length, required by the `finite` method.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Comma-separated subset of finite, series, integral, closed_form, critical_estimate.
    #[arg(long, default_value = "series,integral,closed_form")]
    pub methods: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
    /// Add per-method wall time to the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// A value or `lo:hi:steps`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Grid,
    /// A value or `lo:hi:steps`.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Grid,
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Comma-separated subset of finite, series, integral, closed_form.
    #[arg(long, default_value = "series")]
    pub methods: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h: f64,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 3)]
    pub m_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
}

#[derive(Debug, Args)]
pub struct CriticalFitArgs {
    /// Fixed anisotropy; the window then ranges over `h`.
    #[arg(long, conflicts_with = "h", required_unless_present = "h")]
    pub gamma: Option<f64>,
    /// Fixed field; the window then ranges over `gamma`.
    #[arg(long)]
    pub h: Option<f64>,
    /// `lo:hi` range of the free coupling.
    #[arg(long)]
    pub window: Window,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

/// Evenly spaced values `lo, …, hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let d = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.hi } else { self.lo + d * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let grid = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Grid { lo: v, hi: v, steps: 1 }
            }
            [lo, hi, steps] => Grid {
                lo: num(lo)?,
                hi: num(hi)?,
                steps: steps
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad step count {steps:?}: {e}"))?,
            },
            _ => return Err(format!("expected a value or lo:hi:steps, got {s:?}")),
        };
        if !grid.lo.is_finite() || !grid.hi.is_finite() {
            return Err("grid ends must be finite".into());
        }
        if grid.lo > grid.hi {
            return Err(format!("grid needs lo <= hi, got {s:?}"));
        }
        if grid.steps == 0 {
            return Err("grid needs at least one step".into());
        }
        Ok(grid)
    }
}

/// A closed interval `lo:hi` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad number {lo:?}: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad number {hi:?}: {e}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("window needs finite lo < hi, got {s:?}"));
        }
        Ok(Window { lo, hi })
    }
}
