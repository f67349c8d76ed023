use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sfos_core::fixtures;
use sfos_core::gkyp::{
    bounded_real_theta, check_bounded_real, fdi_sample_check, norm_bound_bisect, BisectConfig, CheckConfig,
    Verdict,
};
use sfos_core::numerics::RMat;
use sfos_core::{linf_sweep, FrequencyBand, SfosModel, SweepConfig};

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Regular system with `rank E = n − 1` (or `n` when `n = 1`) and random order.
fn random_regular_system(rng: &mut ChaCha8Rng) -> SfosModel {
    loop {
        let n = rng.gen_range(2..=3);
        let mut e = RMat::identity(n);
        e[(n - 1, n - 1)] = 0.0;
        let t = gaussian(rng, n, n);
        let e = &(&t * &e) * &t.transpose();
        let alpha = rng.gen_range(0.3..1.5);
        let d = gaussian(rng, 1, 1).scale(0.3);
        if let Ok(m) = SfosModel::new(e, gaussian(rng, n, n), gaussian(rng, n, 1), gaussian(rng, 1, n), d, alpha) {
            return m;
        }
    }
}

fn random_stable_system(rng: &mut ChaCha8Rng) -> SfosModel {
    let n = rng.gen_range(1..=3);
    let g = gaussian(rng, n, n);
    let h = gaussian(rng, n, n);
    let a = &(&h - &h.transpose()) - &(&(&g * &g.transpose()) + &RMat::identity(n).scale(0.5));
    SfosModel::new(RMat::identity(n), a, gaussian(rng, n, 1), gaussian(rng, 1, n), gaussian(rng, 1, 1).scale(0.3), 1.0)
        .unwrap()
}

/// Sup of `σ_max(G(λ))` over `λ = r·e^{j(π − πα/2)}` with `|λ|` in the
/// band's range.
fn opposite_half_line_peak(m: &SfosModel, band: &FrequencyBand) -> f64 {
    let alpha = m.alpha();
    let (lo, hi) = band.range();
    let r_lo = lo.max(1e-4).powf(alpha);
    let r_hi = hi.unwrap_or(1e6).powf(alpha);
    let dir = Complex64::from_polar(1.0, PI * (1.0 - alpha / 2.0));
    let mut best = if lo == 0.0 { m.sigma_max_at_lambda(Complex64::new(0.0, 0.0)) } else { 0.0 };
    for k in 0..=4000 {
        let r = r_lo * (r_hi / r_lo).powf(k as f64 / 4000.0);
        best = best.max(m.sigma_max_at_lambda(dir * r));
    }
    best
}

#[test]
fn feasible_checks_agree_with_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cfg = CheckConfig::default();
    let mut models = vec![fixtures::example1(), fixtures::example2(), fixtures::example3()];
    models.extend((0..20).map(|_| random_regular_system(&mut rng)));
    let bands = [FrequencyBand::Low { omega_l: 10.0 }, FrequencyBand::High { omega_h: 10.0 }, FrequencyBand::Full];
    let mut certified = 0;
    for m in &models {
        for band in &bands {
            let peak = linf_sweep(m, band, &cfg.sweep).unwrap().peak_sigma;
            let probes: Vec<f64> = if peak.is_finite() && peak > 1e-6 {
                vec![0.9 * peak, 1.1 * peak]
            } else {
                vec![1.0]
            };
            for delta in probes {
                let r = check_bounded_real(m, band, delta, &cfg).unwrap();
                // An LMI certificate, with or without the oracle's agreement,
                // must never appear above the true norm.
                if r.variables.is_some() {
                    assert!(peak < delta * (1.0 + 1e-6), "{band} delta {delta} peak {peak}");
                }
                if r.verdict == Verdict::Inconclusive && r.variables.is_none() {
                    // The band LMIs bound G on the whole line through the
                    // origin, so a stall below the sweep peak has to come
                    // from the opposite half-line.
                    let other = opposite_half_line_peak(m, band);
                    assert!(other >= 0.99 * delta, "{band} delta {delta} peak {peak} opposite {other}");
                }
                if r.feasible {
                    certified += 1;
                    let theta = bounded_real_theta(m, delta);
                    assert!(fdi_sample_check(m, &theta, band, 64).unwrap());
                }
            }
        }
    }
    assert!(certified > 20, "only {certified} certified probes");
}

#[test]
fn unit_order_full_band_matches_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = CheckConfig::default();
    for _ in 0..20 {
        let m = random_stable_system(&mut rng);
        let peak = linf_sweep(&m, &FrequencyBand::Full, &cfg.sweep).unwrap().peak_sigma;
        let above = check_bounded_real(&m, &FrequencyBand::Full, 1.02 * peak, &cfg).unwrap();
        let below = check_bounded_real(&m, &FrequencyBand::Full, 0.98 * peak, &cfg).unwrap();
        assert_eq!(above.verdict, Verdict::Feasible, "peak {peak}");
        assert_eq!(below.verdict, Verdict::Infeasible, "peak {peak}");
    }
}

#[test]
fn feasibility_is_monotone_in_delta() {
    let m = fixtures::example1();
    let band = FrequencyBand::Low { omega_l: 100.0 };
    let verdicts: Vec<bool> = [0.7, 0.8, 0.85, 0.9, 1.2]
        .iter()
        .map(|&d| check_bounded_real(&m, &band, d, &CheckConfig::default()).unwrap().feasible)
        .collect();
    let first = verdicts.iter().position(|&f| f).expect("some level is feasible");
    assert!(verdicts[first..].iter().all(|&f| f), "{verdicts:?}");
}

#[test]
fn bisection_is_tight_on_the_examples() {
    let cfg = BisectConfig::default();
    let cases = [
        (fixtures::example1(), FrequencyBand::Low { omega_l: 100.0 }),
        (fixtures::example3(), FrequencyBand::Full),
    ];
    for (m, band) in cases {
        let peak = linf_sweep(&m, &band, &SweepConfig::default()).unwrap().peak_sigma;
        let rep = norm_bound_bisect(&m, &band, 0.5, 1.0, 1e-3, &cfg).unwrap();
        assert!((rep.delta_star - peak).abs() <= 5e-3 * peak, "{band}: {} vs {peak}", rep.delta_star);
        assert!(rep.lower < peak * (1.0 + 1e-6));
    }
}

#[test]
fn example_two_has_no_feasible_upper_bound() {
    let cfg = BisectConfig { max_expansions: 4, ..BisectConfig::default() };
    let r = norm_bound_bisect(&fixtures::example2(), &FrequencyBand::Full, 0.5, 1.0, 1e-3, &cfg);
    assert!(r.is_err());
}
