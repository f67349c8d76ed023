//! Spectral subgradient descent on `φ(x) = max_i λ_max(G_i(x))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::real::RealProblem;
use super::{Engine, EngineOutcome, SolverOptions, StepRule};
use crate::numerics::eig_symmetric_unchecked as eig_real_symmetric;

const RESTARTS: usize = 3;

/// `φ(x)` and a subgradient built from the top eigenvector of the active
/// constraint.
fn phi_and_subgradient(p: &RealProblem, x: &[f64]) -> (f64, Vec<f64>) {
    let mut best = f64::NEG_INFINITY;
    let mut grad = vec![0.0; p.dim];
    for b in &p.blocks {
        let e = eig_real_symmetric(&b.eval(x));
        let top = *e.values.last().expect("nonempty constraint");
        if top > best {
            best = top;
            let n = b.size();
            let v: Vec<f64> = (0..n).map(|i| e.vectors[(i, n - 1)].re).collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (k, g) in &b.gk {
                let mut s = 0.0;
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        row += g[(i, j)] * v[j];
                    }
                    s += v[i] * row;
                }
                grad[*k] = s;
            }
        }
    }
    (best, grad)
}

pub(crate) struct Subgradient;

impl Engine for Subgradient {
    fn run(&self, p: &RealProblem, opts: &SolverOptions) -> EngineOutcome {
        let target = -2.0 * opts.strict_margin;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut iters = 0;
        let mut best_x = vec![0.0; p.dim];
        let mut best_phi = f64::INFINITY;
        for restart in 0..=RESTARTS {
            let mut x: Vec<f64> = if restart == 0 {
                vec![0.0; p.dim]
            } else {
                (0..p.dim).map(|_| StandardNormal.sample(&mut rng)).collect()
            };
            let mut local_best = f64::INFINITY;
            let mut since_improvement = 0;
            let mut k = 0usize;
            while iters < opts.max_iters {
                let (phi, g) = phi_and_subgradient(p, &x);
                iters += 1;
                k += 1;
                if phi < best_phi {
                    best_phi = phi;
                    best_x = x.clone();
                }
                if phi < -opts.strict_margin {
                    return EngineOutcome::feasible(x, iters);
                }
                if phi < local_best - 1e-12 * (1.0 + local_best.abs()) {
                    local_best = phi;
                    since_improvement = 0;
                } else {
                    since_improvement += 1;
                    if since_improvement >= opts.stall_iters {
                        break;
                    }
                }
                let gg: f64 = g.iter().map(|v| v * v).sum();
                if gg == 0.0 {
                    // φ is constant along every direction from here.
                    break;
                }
                let step = match opts.step_rule {
                    StepRule::PolyakTarget => (phi - target) / gg,
                    StepRule::Diminishing => 1.0 / ((k as f64).sqrt() * gg.sqrt()),
                };
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi -= step * gi;
                }
            }
            if iters >= opts.max_iters {
                break;
            }
        }
        EngineOutcome::stalled(best_x, iters, None)
    }
}
