//! Frequency curves, GKYP and bounded-real LMIs, feasibility checks against
//! the sweep oracle, norm bisection and sampled frequency-domain checks.

mod curve;
mod fdi;
mod lmi;

use thiserror::Error;

use crate::band::{BandError, FrequencyBand};
use crate::lmisolve::{feasibility, SolveError, SolverOptions, Variables};
use crate::model::{linf_sweep, ModelError, SfosModel, SweepConfig};
use crate::numerics::NumericsError;

pub use curve::{curve_spec, CurveSpec};
pub use fdi::fdi_sample_check;
pub use lmi::{
    bounded_real_lmi, bounded_real_theta, gkyp_lmi, gkyp_lmi_with_completion, BrlForm,
};

#[derive(Debug, Error, Clone)]
pub enum GkypError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("delta = {0} must be positive and finite")]
    NonpositiveDelta(f64),
    #[error("fractional order alpha = {0} must lie in (0, 2)")]
    InvalidOrder(f64),
    #[error("invalid band: {0}")]
    InvalidBand(#[from] BandError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("no feasible upper bound found up to delta = {hi}")]
    NoFeasibleUpperBound { hi: f64 },
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),
    #[error("pole of the transfer matrix at sample omega = {omega}")]
    PoleAtSample { omega: f64 },
}

/// Outcome of a bounded-real check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// LMI strictly feasible, re-verified, and consistent with the sweep.
    Feasible,
    /// Solver cannot reach a strictly feasible point and the sweep confirms
    /// `peak ≥ δ`.
    Infeasible,
    /// Solver and sweep disagree.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub verdict: Verdict,
    pub feasible: bool,
    /// `−λ_max` over the sense-normalized constraints at the returned point
    /// (negative when no feasible point was found).
    pub margin: f64,
    pub variables: Option<Variables>,
    pub iterations: usize,
    /// Sweep peak on the same band.
    pub oracle_peak: f64,
    /// Lower bound on the best achievable normalized `λ_max`, when the
    /// solver provides one.
    pub lower_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub solver: SolverOptions,
    pub sweep: SweepConfig,
    pub form: BrlForm,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            solver: SolverOptions::default(),
            sweep: SweepConfig::default(),
            form: BrlForm::Completed,
        }
    }
}

/// Relative slack allowed between a feasible LMI and the sweep peak.
const ORACLE_REL_TOL: f64 = 1e-6;

/// Decides `‖G‖ < δ` on the band from the bounded-real LMI, cross-checked
/// against the sweep.
pub fn check_bounded_real(
    model: &SfosModel,
    band: &FrequencyBand,
    delta: f64,
    cfg: &CheckConfig,
) -> Result<FeasibilityResult, GkypError> {
    let lmi = bounded_real_lmi(model, band, delta, cfg.form)?;
    let oracle_peak = linf_sweep(model, band, &cfg.sweep)?.peak_sigma;
    match feasibility(&lmi, &cfg.solver) {
        Ok(sol) => {
            let verdict = if oracle_peak >= delta * (1.0 + ORACLE_REL_TOL) {
                Verdict::Inconclusive
            } else {
                Verdict::Feasible
            };
            Ok(FeasibilityResult {
                verdict,
                feasible: verdict == Verdict::Feasible,
                margin: -sol.phi,
                variables: Some(sol.variables),
                iterations: sol.iterations,
                oracle_peak,
                lower_bound: None,
            })
        }
        Err(SolveError::Stalled {
            best_phi,
            lower_bound,
            iterations,
            ..
        }) => {
            let verdict = if oracle_peak >= delta {
                Verdict::Infeasible
            } else {
                Verdict::Inconclusive
            };
            Ok(FeasibilityResult {
                verdict,
                feasible: false,
                margin: -best_phi,
                variables: None,
                iterations,
                oracle_peak,
                lower_bound,
            })
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectConfig {
    pub check: CheckConfig,
    /// Upper-bound doublings allowed before giving up.
    pub max_expansions: usize,
}

impl Default for BisectConfig {
    fn default() -> Self {
        BisectConfig {
            check: CheckConfig::default(),
            max_expansions: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BisectionReport {
    /// Smallest δ certified feasible.
    pub delta_star: f64,
    /// Largest δ known not to be certified.
    pub lower: f64,
    /// `(δ, verdict)` for every probe, in order.
    pub probes: Vec<(f64, Verdict)>,
}

/// Bisects the smallest δ for which the bounded-real LMI is certified. The
/// bracket is widened when `hi` is not certified or `lo` is.
pub fn norm_bound_bisect(
    model: &SfosModel,
    band: &FrequencyBand,
    lo: f64,
    hi: f64,
    tol: f64,
    cfg: &BisectConfig,
) -> Result<BisectionReport, GkypError> {
    if !(lo >= 0.0 && hi > 0.0 && tol > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(GkypError::InvalidBracket(format!("lo = {lo}, hi = {hi}, tol = {tol}")));
    }
    let mut probes = Vec::new();
    let mut probe = |d: f64| -> Result<bool, GkypError> {
        let r = check_bounded_real(model, band, d, &cfg.check)?;
        probes.push((d, r.verdict));
        Ok(r.verdict == Verdict::Feasible)
    };

    let mut hi = hi;
    let mut expansions = 0;
    while !probe(hi)? {
        expansions += 1;
        if expansions > cfg.max_expansions {
            return Err(GkypError::NoFeasibleUpperBound { hi });
        }
        hi *= 2.0;
    }
    let mut lo = if lo < hi { lo } else { hi / 2.0 };
    while lo > 0.0 && probe(lo)? {
        hi = lo;
        lo = if lo <= tol { 0.0 } else { lo / 2.0 };
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BisectionReport {
        delta_star: hi,
        lower: lo,
        probes,
    })
}
