use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sfos_core::{FrequencyBand, SweepConfig};

#[derive(Debug, Parser)]
#[command(name = "sfos", version, about = "L-infinity analysis of singular fractional-order systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the peak singular value over a band.
    Norm {
        system: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Close the loop with the gain in this file first.
        #[arg(long)]
        gain: Option<PathBuf>,
    },
    /// Decide whether the norm on a band is below --delta.
    Check {
        system: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bisect the smallest certified bound on a band.
    Bisect {
        system: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
        tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute a state-feedback gain meeting --delta and write it to --output.
    Synth {
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the closed-loop system file here.
        #[arg(long)]
        closed_loop: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the sampled peak singular value as `omega,sigma_max` CSV.
    SweepCsv {
        system: PathBuf,
        #[command(flatten)]
        band: BandArgs,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        gain: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandKind {
    Low,
    Mid,
    High,
    Full,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[arg(long, value_enum, default_value_t = BandKind::Full)]
    pub band: BandKind,
    /// Upper edge of the low band.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_max: Option<f64>,
    /// Lower edge of the middle band.
    #[arg(long, allow_hyphen_values = true)]
    pub omega1: Option<f64>,
    /// Upper edge of the middle band.
    #[arg(long, allow_hyphen_values = true)]
    pub omega2: Option<f64>,
    /// Lower edge of the high band.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_min: Option<f64>,
}

impl BandArgs {
    pub fn resolve(&self) -> Result<FrequencyBand, String> {
        let given = [
            ("--omega-max", self.omega_max),
            ("--omega1", self.omega1),
            ("--omega2", self.omega2),
            ("--omega-min", self.omega_min),
        ];
        let (name, wanted): (&str, &[&str]) = match self.band {
            BandKind::Low => ("low", &["--omega-max"]),
            BandKind::Mid => ("mid", &["--omega1", "--omega2"]),
            BandKind::High => ("high", &["--omega-min"]),
            BandKind::Full => ("full", &[]),
        };
        for (flag, value) in given {
            match (value.is_some(), wanted.contains(&flag)) {
                (true, false) => return Err(format!("{flag} does not apply to --band {name}")),
                (false, true) => return Err(format!("--band {name} requires {flag}")),
                _ => {}
            }
        }
        let band = match self.band {
            BandKind::Low => FrequencyBand::low(self.omega_max.unwrap_or_default()),
            BandKind::Mid => FrequencyBand::middle(self.omega1.unwrap_or_default(), self.omega2.unwrap_or_default()),
            BandKind::High => FrequencyBand::high(self.omega_min.unwrap_or_default()),
            BandKind::Full => Ok(FrequencyBand::Full),
        };
        band.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Log-spaced sweep points.
    #[arg(long, default_value_t = 2000)]
    pub grid_points: usize,
    /// Truncation frequency of the sweep on unbounded bands.
    #[arg(long, default_value_t = 1e6)]
    pub grid_max: f64,
}

impl GridArgs {
    pub fn config(&self) -> Result<SweepConfig, String> {
        if self.grid_points < 2 {
            return Err(format!("--grid-points must be at least 2, got {}", self.grid_points));
        }
        if !(self.grid_max > 0.0 && self.grid_max.is_finite()) {
            return Err(format!("--grid-max must be positive, got {}", self.grid_max));
        }
        Ok(SweepConfig {
            grid_points: self.grid_points,
            omega_max: self.grid_max,
            ..SweepConfig::default()
        })
    }
}
