use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sfos_core::fixtures;
use sfos_core::gkyp::{bounded_real_lmi, BrlForm};
use sfos_core::lmisolve::{
    feasibility, pack_variables, verify, AffineLmi, Constraint, Method, Sense, SolveError, SolverOptions,
    VarKind,
};
use sfos_core::numerics::{eig_symmetric, realify, CMat};
use sfos_core::FrequencyBand;

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&g + &g.adjoint()).scale_re(0.5)
}

/// `F(x) = H₀ + s·I + Σ x_k H_k ≺ 0` with random Hermitian `H` and a random
/// shift, so that some instances are feasible and some are not.
fn random_instance(rng: &mut ChaCha8Rng) -> AffineLmi {
    let n = rng.gen_range(2..=4);
    let d = rng.gen_range(1..=4);
    let layout = pack_variables(&[("x", VarKind::RealGeneral(d, 1))]);
    let shift = rng.gen_range(-3.0..3.0);
    let constant = &random_hermitian(rng, n) + &CMat::identity(n).scale_re(shift);
    let coeffs = (0..d).map(|_| random_hermitian(rng, n)).collect();
    let main = Constraint {
        name: "main".into(),
        sense: Sense::NegativeDefinite,
        constant,
        coeffs,
    };
    AffineLmi::from_constraints(layout, vec![main]).unwrap()
}

fn decision_point(lmi: &AffineLmi, opts: &SolverOptions) -> (bool, Vec<f64>) {
    match feasibility(lmi, opts) {
        Ok(s) => (true, s.x),
        Err(SolveError::Stalled { x, .. }) => (false, x),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn realified_check_matches_complex_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let opts = SolverOptions::default();
    let (mut feasible, mut stalled) = (0, 0);
    for _ in 0..50 {
        let lmi = random_instance(&mut rng);
        let (ok, x) = decision_point(&lmi, &opts);
        let complex = verify(&lmi, &x);
        let mut real_margin = f64::INFINITY;
        let mut real_normalized = f64::INFINITY;
        for c in lmi.constraints() {
            let m = c.evaluate(&x).scale_re(c.sense.sign()).hermitian_part();
            let top = eig_symmetric(&realify(&m).unwrap()).unwrap().max();
            real_margin = real_margin.min(-top);
            real_normalized = real_normalized.min(-top / (1.0 + c.constant.norm_fro()));
        }
        assert!((complex.margin - real_margin).abs() < 1e-8);
        assert_eq!(complex.strictly_feasible(opts.strict_margin), real_normalized > opts.strict_margin);
        assert_eq!(ok, complex.strictly_feasible(opts.strict_margin));
        if ok {
            feasible += 1;
        } else {
            stalled += 1;
        }
    }
    assert!(feasible > 0 && stalled > 0, "{feasible} feasible, {stalled} stalled");
}

#[test]
fn scaling_constraints_keeps_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for method in [Method::Barrier, Method::Subgradient] {
        let opts = SolverOptions { method, ..SolverOptions::default() };
        for _ in 0..50 {
            let lmi = random_instance(&mut rng);
            let a = feasibility(&lmi, &opts);
            let b = feasibility(&lmi.scaled(10.0), &opts);
            assert_eq!(a.is_ok(), b.is_ok(), "{method:?}");
        }
    }
}

#[test]
fn identical_options_are_bit_identical() {
    let lmi = bounded_real_lmi(&fixtures::example1(), &FrequencyBand::Low { omega_l: 100.0 }, 0.9, BrlForm::Completed)
        .unwrap();
    for method in [Method::Barrier, Method::Subgradient] {
        for seed in [0, 3] {
            let opts = SolverOptions { method, seed, ..SolverOptions::default() };
            let (a, b) = (feasibility(&lmi, &opts), feasibility(&lmi, &opts));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.iterations, b.iterations);
                    assert_eq!(a.x, b.x);
                    assert_eq!(a.phi.to_bits(), b.phi.to_bits());
                }
                (Err(SolveError::Stalled { x: xa, iterations: ia, .. }), Err(SolveError::Stalled { x: xb, iterations: ib, .. })) => {
                    assert_eq!(ia, ib);
                    assert_eq!(xa, xb);
                }
                (a, b) => panic!("verdicts differ: {:?} vs {:?}", a.is_ok(), b.is_ok()),
            }
        }
    }
}

#[test]
fn engines_on_example_one() {
    let band = FrequencyBand::Low { omega_l: 100.0 };
    let feasible = bounded_real_lmi(&fixtures::example1(), &band, 0.9, BrlForm::Completed).unwrap();
    assert!(feasibility(&feasible, &SolverOptions::default()).is_ok());
    // Neither engine may certify a level below the true norm.
    let infeasible = bounded_real_lmi(&fixtures::example1(), &band, 0.8, BrlForm::Completed).unwrap();
    for method in [Method::Barrier, Method::Subgradient] {
        let opts = SolverOptions { method, ..SolverOptions::default() };
        assert!(feasibility(&infeasible, &opts).is_err(), "{method:?}");
    }
}
