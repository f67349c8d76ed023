use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sfos_core::gkyp::{check_bounded_real, norm_bound_bisect, BisectConfig, CheckConfig, GkypError, Verdict};
use sfos_core::lmisolve::SolverOptions;
use sfos_core::numerics::RMat;
use sfos_core::synth::{closed_loop, synthesize, SynthConfig, SynthError};
use sfos_core::{linf_sweep, FrequencyBand, SfosModel, SweepConfig, SweepResult};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::args::{BandArgs, Command, GridArgs};
use crate::sysfile::{format_gain, format_system, parse_gain, parse_system, SystemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;
pub const EXIT_VERIFICATION: i32 = 6;
pub const EXIT_IO: i32 = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    /// A numerical failure that leaves the question open.
    #[error("{0}")]
    Undecided(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Io { .. } => EXIT_IO,
            CliError::Undecided(_) => EXIT_INCONCLUSIVE,
        }
    }
}

fn io_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_system(path: &Path) -> Result<SystemFile, CliError> {
    parse_system(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_gain(path: &Path) -> Result<RMat, CliError> {
    parse_gain(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn gkyp_error(err: GkypError) -> CliError {
    match err {
        GkypError::NonpositiveDelta(_)
        | GkypError::InvalidBand(_)
        | GkypError::InvalidBracket(_)
        | GkypError::DimensionMismatch(_)
        | GkypError::InvalidOrder(_) => CliError::Input(err.to_string()),
        other => CliError::Undecided(other.to_string()),
    }
}

fn system_label(sys: &SystemFile, path: &Path) -> String {
    sys.name.clone().unwrap_or_else(|| path.display().to_string())
}

fn with_gain(model: SfosModel, gain: Option<&PathBuf>) -> Result<SfosModel, CliError> {
    match gain {
        Some(p) => {
            let k = load_gain(p)?;
            closed_loop(&model, &k).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => Ok(model),
    }
}

fn sweep(model: &SfosModel, band: &FrequencyBand, cfg: &SweepConfig) -> Result<SweepResult, CliError> {
    linf_sweep(model, band, cfg).map_err(|e| CliError::Undecided(e.to_string()))
}

fn solver(seed: u64) -> SolverOptions {
    SolverOptions {
        seed,
        ..SolverOptions::default()
    }
}

fn setup(band: &BandArgs, grid: &GridArgs) -> Result<(FrequencyBand, SweepConfig), CliError> {
    Ok((band.resolve().map_err(CliError::Input)?, grid.config().map_err(CliError::Input)?))
}

pub fn run(cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::Norm { system, band, grid, gain } => {
            let (band, cfg) = setup(band, grid)?;
            let sys = load_system(system)?;
            let label = system_label(&sys, system);
            let model = with_gain(sys.model, gain.as_ref())?;
            let r = sweep(&model, &band, &cfg)?;
            let poles = r.samples.iter().filter(|s| s.sigma.is_infinite()).count();
            println!("system      {label}");
            println!("band        {band}");
            println!("peak sigma  {}", fmt_sigma(r.peak_sigma));
            println!("peak omega  {}", fmt_omega(r.peak_omega));
            println!("poles       {poles} grid samples");
            println!("unbounded   {}", if r.is_unbounded() { "yes" } else { "no" });
            Ok(if r.is_unbounded() { EXIT_UNBOUNDED } else { EXIT_OK })
        }
        Command::Check { system, band, delta, grid, seed } => {
            let (band, cfg) = setup(band, grid)?;
            let sys = load_system(system)?;
            let check = CheckConfig {
                solver: solver(*seed),
                sweep: cfg,
                ..CheckConfig::default()
            };
            let r = check_bounded_real(&sys.model, &band, *delta, &check).map_err(gkyp_error)?;
            println!("system      {}", system_label(&sys, system));
            println!("band        {band}");
            println!("delta       {delta}");
            println!("verdict     {}", verdict_name(r.verdict));
            println!("margin      {:.6e}", r.margin);
            println!("iterations  {}", r.iterations);
            println!("sweep peak  {}", fmt_sigma(r.oracle_peak));
            Ok(match r.verdict {
                Verdict::Feasible => EXIT_OK,
                Verdict::Infeasible => EXIT_INFEASIBLE,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Command::Bisect { system, band, lo, hi, tol, grid, seed } => {
            let (band, cfg) = setup(band, grid)?;
            let sys = load_system(system)?;
            let bisect = BisectConfig {
                check: CheckConfig {
                    solver: solver(*seed),
                    sweep: cfg,
                    ..CheckConfig::default()
                },
                ..BisectConfig::default()
            };
            println!("system      {}", system_label(&sys, system));
            println!("band        {band}");
            match norm_bound_bisect(&sys.model, &band, *lo, *hi, *tol, &bisect) {
                Ok(rep) => {
                    for (d, v) in &rep.probes {
                        println!("probe       {d:.9} {}", verdict_name(*v));
                    }
                    println!("delta*      {}", rep.delta_star);
                    println!("lower       {}", rep.lower);
                    Ok(EXIT_OK)
                }
                Err(GkypError::NoFeasibleUpperBound { hi }) => {
                    println!("delta*      none (no certified bound up to {hi})");
                    Ok(EXIT_INFEASIBLE)
                }
                Err(e) => Err(gkyp_error(e)),
            }
        }
        Command::Synth { system, delta, output, closed_loop: cl_path, grid, seed } => {
            let cfg = grid.config().map_err(CliError::Input)?;
            let sys = load_system(system)?;
            let synth = SynthConfig {
                solver: solver(*seed),
                sweep: cfg,
                ..SynthConfig::default()
            };
            println!("system      {}", system_label(&sys, system));
            println!("delta       {delta}");
            match synthesize(&sys.model, *delta, &synth) {
                Ok(r) => {
                    write_atomic(output, &format_gain(&r.k))?;
                    if let Some(p) = cl_path {
                        let name = format!("{} closed loop", system_label(&sys, system));
                        write_atomic(p, &format_system(Some(&name), &r.closed_loop))?;
                    }
                    println!("K           {:?}", r.k.as_slice());
                    println!("closed loop {}", r.closed_loop_norm);
                    println!("written     {}", output.display());
                    Ok(EXIT_OK)
                }
                Err(e @ SynthError::NonpositiveDelta(_)) => Err(CliError::Input(e.to_string())),
                Err(e @ SynthError::LmiInfeasible { .. }) => {
                    println!("result      infeasible: {e}");
                    Ok(EXIT_INFEASIBLE)
                }
                Err(
                    e @ (SynthError::VerificationFailed { .. }
                    | SynthError::SingularX { .. }
                    | SynthError::ComplexGain { .. }),
                ) => {
                    println!("result      verification failed: {e}");
                    Ok(EXIT_VERIFICATION)
                }
                Err(e) => Err(CliError::Undecided(e.to_string())),
            }
        }
        Command::SweepCsv { system, band, output, gain, grid } => {
            let (band, cfg) = setup(band, grid)?;
            let sys = load_system(system)?;
            let model = with_gain(sys.model, gain.as_ref())?;
            let r = sweep(&model, &band, &cfg)?;
            let csv = sweep_csv(&r);
            write_atomic(output, &csv)?;
            println!("rows        {}", csv.lines().count() - 1);
            println!("peak sigma  {}", fmt_sigma(r.peak_sigma));
            println!("written     {}", output.display());
            Ok(EXIT_OK)
        }
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Feasible => "feasible",
        Verdict::Infeasible => "infeasible",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn fmt_sigma(s: f64) -> String {
    if s.is_infinite() {
        "inf".to_string()
    } else {
        format!("{s:.6}")
    }
}

fn fmt_omega(w: f64) -> String {
    if w.abs() >= 1e6 {
        format!("{w:.6e}")
    } else {
        format!("{w:.6}")
    }
}

/// `omega,sigma_max` rows in strictly increasing ω; poles print as `inf`.
fn sweep_csv(r: &SweepResult) -> String {
    let mut out = String::from("omega,sigma_max\n");
    let mut last = f64::NEG_INFINITY;
    for s in &r.samples {
        if s.omega > last {
            writeln!(out, "{},{}", s.omega, s.sigma).expect("writing to a String");
            last = s.omega;
        }
    }
    out
}
