//! Log-barrier path following for `min t  s.t.  G_i(x) ≼ t·I, ‖x‖ ≤ R`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::real::RealProblem;
use super::{Engine, EngineOutcome, SolverOptions};
use crate::numerics::RMat;

const GROWTH: f64 = 8.0;
const NEWTON_TOL: f64 = 1e-9;
/// Centering tolerance accepted once rounding stops Newton from improving.
const NEWTON_TOL_LOOSE: f64 = 1e-6;

struct Eval {
    value: f64,
    grad: Vec<f64>,
    hess: RMat,
}

/// Barrier objective `μt − Σ log det(tI − G_i) − log(R² − ‖x‖²)`, or `None`
/// outside its domain.
fn objective(p: &RealProblem, x: &[f64], t: f64, mu: f64, r2: f64) -> Option<f64> {
    let ball = r2 - x.iter().map(|v| v * v).sum::<f64>();
    if !(ball > 0.0) {
        return None;
    }
    let mut f = mu * t - ball.ln();
    for b in &p.blocks {
        let s = slack(b.eval(x), t);
        let l = s.cholesky()?;
        f -= 2.0 * (0..l.rows()).map(|i| l[(i, i)].ln()).sum::<f64>();
    }
    Some(f)
}

fn slack(mut g: RMat, t: f64) -> RMat {
    let n = g.rows();
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = -g[(i, j)];
        }
        g[(i, i)] += t;
    }
    g
}

fn evaluate(p: &RealProblem, x: &[f64], t: f64, mu: f64, r2: f64) -> Option<Eval> {
    let d = p.dim;
    let ball = r2 - x.iter().map(|v| v * v).sum::<f64>();
    if !(ball > 0.0) {
        return None;
    }
    let mut value = mu * t - ball.ln();
    let mut grad = vec![0.0; d + 1];
    let mut hess = RMat::zeros(d + 1, d + 1);
    grad[d] = mu;
    for k in 0..d {
        grad[k] += 2.0 * x[k] / ball;
        hess[(k, k)] += 2.0 / ball;
        for l in 0..d {
            hess[(k, l)] += 4.0 * x[k] * x[l] / (ball * ball);
        }
    }
    for b in &p.blocks {
        let l = slack(b.eval(x), t).cholesky()?;
        value -= 2.0 * (0..l.rows()).map(|i| l[(i, i)].ln()).sum::<f64>();
        let z = RMat::cholesky_inverse(&l);
        let zt = z.transpose();
        let m: Vec<(usize, RMat)> = b.gk.iter().map(|(k, g)| (*k, &z * g)).collect();
        grad[d] -= z.trace();
        hess[(d, d)] += z.dot(&zt);
        for (i, (k, mk)) in m.iter().enumerate() {
            grad[*k] += mk.trace();
            let h_kt = -mk.dot(&zt);
            hess[(*k, d)] += h_kt;
            hess[(d, *k)] += h_kt;
            let mkt = mk.transpose();
            for (l, ml) in &m[i..] {
                let h = ml.dot(&mkt);
                hess[(*k, *l)] += h;
                if *l != *k {
                    hess[(*l, *k)] += h;
                }
            }
        }
    }
    Some(Eval { value, grad, hess })
}

/// Solves `h·x = rhs` for symmetric positive (semi)definite `h`, adding
/// diagonal jitter when the factorization breaks down.
fn spd_solve(h: &RMat, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = h.rows();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut jitter = 0.0;
    for _ in 0..12 {
        let mut hj = h.clone();
        for i in 0..n {
            hj[(i, i)] += jitter;
        }
        if let Some(l) = hj.cholesky() {
            let mut y = rhs.to_vec();
            for i in 0..n {
                let mut s = y[i];
                for k in 0..i {
                    s -= l[(i, k)] * y[k];
                }
                y[i] = s / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in i + 1..n {
                    s -= l[(k, i)] * y[k];
                }
                y[i] = s / l[(i, i)];
            }
            return Some(y);
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
    }
    None
}

fn below_threshold(p: &RealProblem, x: &[f64], level: f64) -> bool {
    p.blocks.iter().all(|b| slack(b.eval(x), level).cholesky().is_some())
}

pub(crate) struct Barrier;

impl Engine for Barrier {
    fn run(&self, p: &RealProblem, opts: &SolverOptions) -> EngineOutcome {
        let d = p.dim;
        let target = -2.0 * opts.strict_margin;
        let r2 = opts.radius * opts.radius;
        let nu = p.degree() as f64 + 1.0;
        // Seed 0 starts at the origin; other seeds start at a Gaussian point.
        let mut x = if opts.seed == 0 {
            vec![0.0; d]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cap = 0.5 * opts.radius;
            if norm > cap {
                x.iter().map(|v| v * cap / norm).collect()
            } else {
                x
            }
        };
        let phi0 = super::phi(p, &x);
        if phi0 < target {
            return EngineOutcome::feasible(x, 0);
        }
        let mut t = phi0 + 1.0;
        let mut mu = 1.0;
        let mut iters = 0;
        loop {
            // The duality bound below only holds near the central path.
            let centered = loop {
                if iters >= opts.max_iters {
                    return EngineOutcome::stalled(x, iters, None);
                }
                let Some(ev) = evaluate(p, &x, t, mu, r2) else {
                    return EngineOutcome::stalled(x, iters, None);
                };
                let neg: Vec<f64> = ev.grad.iter().map(|g| -g).collect();
                let Some(dz) = spd_solve(&ev.hess, &neg) else {
                    return EngineOutcome::stalled(x, iters, None);
                };
                let decrement: f64 = -ev.grad.iter().zip(&dz).map(|(g, s)| g * s).sum::<f64>();
                if decrement / 2.0 < NEWTON_TOL {
                    break true;
                }
                let mut step = 1.0;
                let accepted = loop {
                    let xn: Vec<f64> = x.iter().zip(&dz).map(|(a, s)| a + step * s).collect();
                    let tn = t + step * dz[d];
                    if let Some(f) = objective(p, &xn, tn, mu, r2) {
                        if f <= ev.value - 0.25 * step * decrement {
                            break Some((xn, tn, f));
                        }
                    }
                    step *= 0.5;
                    if step < 1e-12 {
                        break None;
                    }
                };
                iters += 1;
                let Some((xn, tn, f)) = accepted else {
                    break decrement / 2.0 < NEWTON_TOL_LOOSE;
                };
                x = xn;
                t = tn;
                if t < target || below_threshold(p, &x, target) {
                    return EngineOutcome::feasible(x, iters);
                }
                if ev.value - f <= 1e-13 * (1.0 + ev.value.abs()) {
                    break decrement / 2.0 < NEWTON_TOL_LOOSE;
                }
            };
            let lower = t - nu / mu;
            if centered && lower > -opts.strict_margin {
                return EngineOutcome::stalled(x, iters, Some(lower));
            }
            mu *= GROWTH;
            if !mu.is_finite() {
                return EngineOutcome::stalled(x, iters, Some(lower));
            }
        }
    }
}
