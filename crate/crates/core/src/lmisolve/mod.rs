//! Strict-feasibility engine for affine Hermitian LMI systems.
//!
//! Every constraint is realified and normalized by `1 + ‖F₀‖_F` before the
//! numeric loop, so a point is accepted when
//! `λ_max(±F_i(x)) ≤ −ε·(1 + ‖F_i0‖_F)` for every `i`.

mod affine;
mod barrier;
mod real;
mod subgradient;

use thiserror::Error;

use crate::numerics::{eig_hermitian, eig_symmetric_unchecked, NumericsError};

pub use affine::{
    pack_variables, AffineLmi, Constraint, Sense, Term, VarBlock, VarKind, VarLayout, Variables,
};

use real::RealProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Polyak step toward the level `−2ε`.
    PolyakTarget,
    /// `1/(√k·‖g‖)`.
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Log-barrier path following on `min t s.t. G_i(x) ≼ tI` with
    /// Newton steps.
    Barrier,
    /// Spectral subgradient descent with seeded restarts.
    Subgradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub strict_margin: f64,
    pub stall_iters: usize,
    pub step_rule: StepRule,
    pub seed: u64,
    pub method: Method,
    /// Decision vectors are confined to `‖x‖ < radius`.
    pub radius: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 5000,
            strict_margin: 1e-7,
            stall_iters: 300,
            step_rule: StepRule::PolyakTarget,
            seed: 0,
            method: Method::Barrier,
            radius: 1e6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.max_iters == 0 {
            return Err(SolveError::InvalidOptions("max_iters must be positive".into()));
        }
        if !(self.strict_margin > 0.0 && self.strict_margin.is_finite()) {
            return Err(SolveError::InvalidOptions("strict_margin must be positive".into()));
        }
        if !(self.radius > 0.0) {
            return Err(SolveError::InvalidOptions("radius must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub variables: Variables,
    /// `max_i λ_max(G_i(x))` of the normalized realified constraints.
    pub phi: f64,
    /// `−max_i λ_max(±F_i(x))`, unnormalized.
    pub margin: f64,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone)]
pub enum SolveError {
    /// No strictly feasible point found. `lower_bound`, when present, bounds
    /// the best achievable `φ` inside the search ball from below.
    #[error("solver stalled at phi = {best_phi:.3e} after {iterations} iterations")]
    Stalled {
        best_phi: f64,
        lower_bound: Option<f64>,
        iterations: usize,
        x: Vec<f64>,
    },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// `−max_i λ_max(±F_i(x))`.
    pub margin: f64,
    /// `−max_i λ_max(±F_i(x)) / (1 + ‖F_i0‖_F)`.
    pub normalized_margin: f64,
    /// Ascending eigenvalues of `±F_i(x)` (sign per sense), per constraint.
    pub eigenvalues: Vec<Vec<f64>>,
}

impl VerifyReport {
    pub fn strictly_feasible(&self, strict_margin: f64) -> bool {
        self.normalized_margin > strict_margin
    }
}

pub(crate) struct EngineOutcome {
    x: Vec<f64>,
    iterations: usize,
    feasible: bool,
    lower_bound: Option<f64>,
}

impl EngineOutcome {
    fn feasible(x: Vec<f64>, iterations: usize) -> Self {
        EngineOutcome {
            x,
            iterations,
            feasible: true,
            lower_bound: None,
        }
    }

    fn stalled(x: Vec<f64>, iterations: usize, lower_bound: Option<f64>) -> Self {
        EngineOutcome {
            x,
            iterations,
            feasible: false,
            lower_bound,
        }
    }
}

pub(crate) trait Engine {
    fn run(&self, p: &RealProblem, opts: &SolverOptions) -> EngineOutcome;
}

fn phi(p: &RealProblem, x: &[f64]) -> f64 {
    p.blocks
        .iter()
        .map(|b| eig_symmetric_unchecked(&b.eval(x)).max())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Searches for a decision vector satisfying every constraint strictly.
/// Deterministic for fixed options.
pub fn feasibility(lmi: &AffineLmi, opts: &SolverOptions) -> Result<Solution, SolveError> {
    opts.validate()?;
    let prob = RealProblem::from_lmi(lmi);
    let out = match opts.method {
        Method::Barrier => barrier::Barrier.run(&prob, opts),
        Method::Subgradient => subgradient::Subgradient.run(&prob, opts),
    };
    let best_phi = phi(&prob, &out.x);
    if out.feasible {
        let report = verify(lmi, &out.x);
        if report.strictly_feasible(opts.strict_margin) {
            return Ok(Solution {
                variables: lmi.layout().unpack(&out.x),
                x: out.x,
                phi: best_phi,
                margin: report.margin,
                iterations: out.iterations,
            });
        }
    }
    Err(SolveError::Stalled {
        best_phi,
        lower_bound: out.lower_bound,
        iterations: out.iterations,
        x: out.x,
    })
}

/// Eigencheck of every constraint at `x`, in complex form.
pub fn verify(lmi: &AffineLmi, x: &[f64]) -> VerifyReport {
    let mut margin = f64::INFINITY;
    let mut normalized_margin = f64::INFINITY;
    let mut eigenvalues = Vec::with_capacity(lmi.constraints().len());
    for c in lmi.constraints() {
        let m = c.evaluate(x).scale_re(c.sense.sign()).hermitian_part();
        let e = eig_hermitian(&m).expect("hermitian part is Hermitian");
        let top = e.max();
        margin = margin.min(-top);
        normalized_margin = normalized_margin.min(-top / (1.0 + c.constant.norm_fro()));
        eigenvalues.push(e.values);
    }
    VerifyReport {
        margin,
        normalized_margin,
        eigenvalues,
    }
}

impl From<NumericsError> for SolveError {
    fn from(e: NumericsError) -> Self {
        SolveError::InvalidOptions(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::CMat;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_lmi(terms: &[(f64, f64)]) -> AffineLmi {
        let layout = pack_variables(&[("x", VarKind::RealGeneral(1, 1))]);
        let terms = terms.to_vec();
        AffineLmi::build(layout, move |v| {
            let x = v["x"][(0, 0)];
            terms
                .iter()
                .map(|&(a, b)| Term::neg("c", CMat::new(1, 1, vec![x * a + b]).unwrap()))
                .collect()
        })
        .unwrap()
    }

    fn all_methods() -> Vec<SolverOptions> {
        vec![
            SolverOptions::default(),
            SolverOptions {
                method: Method::Subgradient,
                ..SolverOptions::default()
            },
            SolverOptions {
                method: Method::Subgradient,
                step_rule: StepRule::Diminishing,
                ..SolverOptions::default()
            },
        ]
    }

    #[test]
    fn single_scalar_constraint_is_feasible() {
        let lmi = scalar_lmi(&[(1.0, -1.0)]);
        for opts in all_methods() {
            let s = feasibility(&lmi, &opts).unwrap();
            assert!(s.margin > 0.0);
        }
        let r = verify(&lmi, &[0.0]);
        assert!((r.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contradictory_half_lines_stall() {
        let lmi = scalar_lmi(&[(1.0, 1.0), (-1.0, 1.0)]);
        for opts in all_methods() {
            assert!(matches!(feasibility(&lmi, &opts), Err(SolveError::Stalled { .. })));
        }
    }

    #[test]
    fn barrier_reports_lower_bound_when_infeasible() {
        let lmi = scalar_lmi(&[(1.0, 1.0), (-1.0, 1.0)]);
        match feasibility(&lmi, &SolverOptions::default()) {
            Err(SolveError::Stalled { lower_bound: Some(lb), .. }) => assert!(lb > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn options_are_validated() {
        let lmi = scalar_lmi(&[(1.0, -1.0)]);
        let bad = SolverOptions {
            max_iters: 0,
            ..SolverOptions::default()
        };
        assert!(matches!(feasibility(&lmi, &bad), Err(SolveError::InvalidOptions(_))));
    }

    fn random_feasible_instance(rng: &mut ChaCha8Rng) -> AffineLmi {
        let n = rng.gen_range(1..=3);
        let layout = pack_variables(&[("P", VarKind::HermitianComplex(2)), ("K", VarKind::RealGeneral(1, 2))]);
        let dim = layout.dim();
        let rand_herm = |rng: &mut ChaCha8Rng| {
            CMat::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
            .hermitian_part()
        };
        let coeffs: Vec<CMat> = (0..dim).map(|_| rand_herm(rng)).collect();
        let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut at_x0 = CMat::zeros(n, n);
        for (c, &v) in coeffs.iter().zip(&x0) {
            at_x0 = &at_x0 + &c.scale_re(v);
        }
        let constant = &CMat::identity(n).scale_re(-1.0) - &at_x0;
        AffineLmi::from_constraints(
            layout,
            vec![Constraint {
                name: "F".into(),
                sense: Sense::NegativeDefinite,
                constant,
                coeffs,
            }],
        )
        .unwrap()
    }

    #[test]
    fn constructed_interior_point_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..100 {
            let lmi = random_feasible_instance(&mut rng);
            let s = feasibility(&lmi, &SolverOptions::default()).unwrap();
            assert!(s.phi < 0.0);
            let r = verify(&lmi, &s.x);
            assert!((r.normalized_margin + s.phi).abs() < 1e-10 * (1.0 + s.phi.abs()));
        }
    }

    #[test]
    fn subgradient_finds_constructed_interior_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let opts = SolverOptions {
            method: Method::Subgradient,
            ..SolverOptions::default()
        };
        for _ in 0..30 {
            let lmi = random_feasible_instance(&mut rng);
            assert!(feasibility(&lmi, &opts).is_ok());
        }
    }

    #[test]
    fn solves_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lmi = random_feasible_instance(&mut rng);
        for opts in all_methods() {
            let a = feasibility(&lmi, &opts).unwrap();
            let b = feasibility(&lmi, &opts).unwrap();
            assert_eq!(a.x, b.x);
            assert_eq!(a.iterations, b.iterations);
        }
    }

    #[test]
    fn positive_definite_sense() {
        // Q ≻ 0 and Q ≺ 2I in one Hermitian block.
        let layout = pack_variables(&[("Q", VarKind::HermitianComplex(2))]);
        let lmi = AffineLmi::build(layout, |v| {
            let q = v["Q"].clone();
            vec![
                Term::pos("Q", q.clone()),
                Term::neg("Q-2I", &q - &CMat::identity(2).scale_re(2.0)),
            ]
        })
        .unwrap();
        let s = feasibility(&lmi, &SolverOptions::default()).unwrap();
        let e = eig_hermitian(&s.variables["Q"]).unwrap();
        assert!(e.min() > 0.0 && e.max() < 2.0);
    }
}
