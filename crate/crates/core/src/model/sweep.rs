//! Frequency-sweep L∞ oracle.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ModelError, SfosModel};
use crate::band::FrequencyBand;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Log-spaced base grid size.
    pub grid_points: usize,
    /// Golden-section stops once the bracket is below this, relative to ω.
    pub refine_tol: f64,
    /// Any sample above this marks the response unbounded.
    pub divergence_cap: f64,
    /// Truncation of unbounded bands.
    pub omega_max: f64,
    /// Smallest positive grid frequency.
    pub omega_floor: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid_points: 2000,
            refine_tol: 1e-6,
            divergence_cap: 1e8,
            omega_max: 1e6,
            omega_floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub omega: f64,
    /// `σ_max(G)`; infinite at a pole.
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Sorted by ω.
    pub samples: Vec<SweepSample>,
    pub peak_omega: f64,
    /// Infinite when the response is unbounded on the band.
    pub peak_sigma: f64,
    pub refined: bool,
}

impl SweepResult {
    pub fn is_unbounded(&self) -> bool {
        self.peak_sigma.is_infinite()
    }
}

/// Growth factor between the two λ-magnitude probes that counts as divergence.
const GROWTH_RATIO: f64 = 100.0;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Samples `σ_max(G(λ(ω)))` over the band and returns its refined supremum.
pub fn linf_sweep(
    model: &SfosModel,
    band: &FrequencyBand,
    cfg: &SweepConfig,
) -> Result<SweepResult, ModelError> {
    band.validate()?;
    if !model.pencil_is_regular() {
        return Err(ModelError::IrregularPencil);
    }
    let (lo, hi) = band.range();
    let hi_eff = hi.unwrap_or_else(|| cfg.omega_max.max(lo * 10.0));
    let start = lo.max(cfg.omega_floor).min(hi_eff);

    let mut omegas = log_grid(start, hi_eff, cfg.grid_points.max(2));
    if lo == 0.0 {
        omegas.insert(0, 0.0);
    }
    if hi.is_none() {
        omegas.push(hi_eff * 10.0);
        omegas.push(hi_eff * 100.0);
    }

    let sigmas: Vec<f64> = omegas
        .par_iter()
        .map(|&w| model.sigma_max(w))
        .collect::<Result<_, _>>()?;
    let samples: Vec<SweepSample> = omegas
        .iter()
        .zip(&sigmas)
        .map(|(&omega, &sigma)| SweepSample { omega, sigma })
        .collect();

    let (imax, &smax) = sigmas
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is never empty");
    let mut peak_omega = omegas[imax];
    let mut peak_sigma = smax;
    let mut refined = false;

    if peak_sigma.is_finite() && peak_sigma <= cfg.divergence_cap {
        let a = omegas[imax.saturating_sub(1)];
        let b = omegas[(imax + 1).min(omegas.len() - 1)];
        if b > a {
            let (w, s) = golden_max(model, a, b, cfg.refine_tol)?;
            refined = true;
            if s > peak_sigma {
                peak_sigma = s;
                peak_omega = w;
            }
        }
    }

    if peak_sigma > cfg.divergence_cap {
        peak_sigma = f64::INFINITY;
    }
    if hi.is_none() && peak_sigma.is_finite() {
        if let Some(w) = diverges_at_infinity(model, hi_eff * 100.0, cfg) {
            peak_sigma = f64::INFINITY;
            peak_omega = w;
        }
    }

    Ok(SweepResult {
        samples,
        peak_omega,
        peak_sigma,
        refined,
    })
}

/// Golden-section maximisation of σ over `[a, b]`, in log-ω when `a > 0`.
fn golden_max(model: &SfosModel, a: f64, b: f64, tol: f64) -> Result<(f64, f64), ModelError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let log = a > 0.0;
    type Map = fn(f64) -> f64;
    let (to, from): (Map, Map) = if log {
        (f64::ln, f64::exp)
    } else {
        (|x| x, |x| x)
    };
    let f = |u: f64| model.sigma_max(from(u));
    let (mut lo, mut hi) = (to(a), to(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        let width = from(hi) - from(lo);
        if width <= tol * from(hi).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (from(x1), f1) } else { (from(x2), f2) })
}

/// Probes `|λ|` three and six decades past the last tail sample along the
/// principal ray; returns the ω of the probe that shows divergence.
fn diverges_at_infinity(model: &SfosModel, omega_tail: f64, cfg: &SweepConfig) -> Option<f64> {
    let alpha = model.alpha();
    let r0 = omega_tail.powf(alpha).max(1.0);
    let dir = Complex64::from_polar(1.0, FRAC_PI_2 * alpha);
    let probe = |k: i32| {
        let r = r0 * 10f64.powi(3 * k);
        (r.powf(1.0 / alpha), model.sigma_max_at_lambda(dir * r))
    };
    let (w1, s1) = probe(1);
    let (w2, s2) = probe(2);
    if !(s1.is_finite() && s1 <= cfg.divergence_cap) {
        return Some(w1);
    }
    if !(s2.is_finite() && s2 <= cfg.divergence_cap) || (s2 > GROWTH_RATIO * s1 && s2 > 1e-12) {
        return Some(w2);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numerics::RMat;

    #[test]
    fn example_one_low_band_peak() {
        let r = linf_sweep(
            &fixtures::example1(),
            &FrequencyBand::Low { omega_l: 100.0 },
            &SweepConfig::default(),
        )
        .unwrap();
        let want = 3.0 / 12.5f64.sqrt();
        assert!((r.peak_sigma - want).abs() < 1e-9, "{}", r.peak_sigma);
        assert!((r.peak_omega - 12.5).abs() < 1e-3, "{}", r.peak_omega);
        assert!(r.refined);
        assert_eq!(r.samples[0].omega, 0.0);
        assert!((r.samples[0].sigma - 0.6).abs() < 1e-12);
        assert!(r.samples.windows(2).all(|w| w[0].omega < w[1].omega));
    }

    #[test]
    fn example_three_full_band_peak() {
        let r = linf_sweep(&fixtures::example3(), &FrequencyBand::Full, &SweepConfig::default()).unwrap();
        // 1.2·|λ+5|/|λ−5| is maximal where λ = 5j·e^{..}: |λ| = 5, ω = 25.
        let l = Complex64::from_polar(5.0, std::f64::consts::FRAC_PI_4);
        let want = 1.2 * (l + 5.0).norm() / (l - 5.0).norm();
        assert!((r.peak_sigma - want).abs() < 1e-9);
        assert!((r.peak_sigma - 2.8971).abs() < 1e-4);
        assert!((r.peak_omega - 25.0).abs() < 1e-2);
    }

    #[test]
    fn example_two_is_unbounded() {
        let r = linf_sweep(&fixtures::example2(), &FrequencyBand::Full, &SweepConfig::default()).unwrap();
        assert!(r.is_unbounded());
    }

    #[test]
    fn bounded_band_of_unbounded_system_is_finite() {
        let r = linf_sweep(
            &fixtures::example2(),
            &FrequencyBand::Low { omega_l: 32.0 },
            &SweepConfig::default(),
        )
        .unwrap();
        assert!((r.peak_sigma - 2.0).abs() < 1e-9);
    }

    #[test]
    fn pole_on_axis_flags_unbounded() {
        let m = SfosModel::new(
            RMat::identity(1),
            RMat::zeros(1, 1),
            RMat::identity(1),
            RMat::identity(1),
            RMat::zeros(1, 1),
            1.0,
        )
        .unwrap();
        let r = linf_sweep(&m, &FrequencyBand::Full, &SweepConfig::default()).unwrap();
        assert!(r.is_unbounded());
        assert_eq!(r.samples[0].sigma, f64::INFINITY);
    }

    #[test]
    fn middle_and_high_bands() {
        let m = fixtures::example1();
        let r = linf_sweep(&m, &FrequencyBand::Middle { omega_1: 1.0, omega_2: 4.0 }, &SweepConfig::default())
            .unwrap();
        // 3/|λ−5| increases up to ω = 12.5, so the band maximum sits at ω₂.
        let l = Complex64::from_polar(2.0, std::f64::consts::FRAC_PI_4);
        assert!((r.peak_sigma - 3.0 / (l - 5.0).norm()).abs() < 1e-9);
        let r = linf_sweep(&m, &FrequencyBand::High { omega_h: 20.0 }, &SweepConfig::default()).unwrap();
        let l = Complex64::from_polar(20f64.sqrt(), std::f64::consts::FRAC_PI_4);
        assert!((r.peak_sigma - 3.0 / (l - 5.0).norm()).abs() < 1e-9);
    }
}
