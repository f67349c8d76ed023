//! Descriptor fractional-order model and transfer-matrix evaluation.

mod sweep;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::band::BandError;
use crate::numerics::{
    condition_number, max_singular_value, null_space, solve, svd, CMat, NumericsError, RMat,
    CONDITION_CUTOFF,
};

pub use sweep::{linf_sweep, SweepConfig, SweepResult, SweepSample};

/// Relative singular-value threshold used to decide the rank of `E`.
pub const RANK_TOL: f64 = 1e-10;

const PROBE_SEED: u64 = 0x5f05_2024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fractional order alpha = {0} must lie in (0, 2)")]
    InvalidOrder(f64),
    #[error("matrix {name} has a non-finite entry")]
    NonFinite { name: &'static str },
    #[error("pencil lambda*E - A is singular for every lambda")]
    IrregularPencil,
    #[error("frequency {0} is negative or not a number")]
    NegativeFrequency(f64),
    #[error("pole of the transfer matrix at omega = {omega} (condition {condition:.3e})")]
    PoleAtFrequency { omega: f64, condition: f64 },
    #[error(transparent)]
    Band(#[from] BandError),
}

/// `E·D^α x = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone)]
pub struct SfosModel {
    e: RMat,
    a: RMat,
    b: RMat,
    c: RMat,
    d: RMat,
    alpha: f64,
    rank_e: usize,
    ker_e: RMat,
    coker_e: RMat,
    balanced: Balanced,
}

/// `E = U·Σ·Vᵀ` so that `Uᵀ(λE − A)V = λΣ − Ã`; the rotated pencil keeps the
/// structural rows of a singular `E` separate, which keeps large-λ solves
/// well conditioned once rows are equilibrated.
#[derive(Debug, Clone)]
struct Balanced {
    sigma: Vec<f64>,
    a: CMat,
    b: CMat,
    c: CMat,
}

impl SfosModel {
    pub fn new(
        e: RMat,
        a: RMat,
        b: RMat,
        c: RMat,
        d: RMat,
        alpha: f64,
    ) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(ModelError::InvalidOrder(alpha));
        }
        for (name, m) in [("E", &e), ("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !m.is_finite() {
                return Err(ModelError::NonFinite { name });
            }
        }
        let n = a.rows();
        let mism = |msg: String| Err(ModelError::DimensionMismatch(msg));
        if a.cols() != n {
            return mism(format!("A must be square, got {}x{}", a.rows(), a.cols()));
        }
        if e.shape() != (n, n) {
            return mism(format!("E is {}x{}, expected {n}x{n}", e.rows(), e.cols()));
        }
        if b.rows() != n {
            return mism(format!("B has {} rows, expected {n}", b.rows()));
        }
        if c.cols() != n {
            return mism(format!("C has {} columns, expected {n}", c.cols()));
        }
        if d.shape() != (c.rows(), b.cols()) {
            return mism(format!(
                "D is {}x{}, expected {}x{}",
                d.rows(),
                d.cols(),
                c.rows(),
                b.cols()
            ));
        }
        let ec = e.to_complex();
        let dec = svd(&ec);
        let top = dec.values.first().copied().unwrap_or(0.0);
        let rank_e = dec.values.iter().filter(|&&s| s > RANK_TOL * top && s > 0.0).count();
        let ker_e = null_space(&ec, RANK_TOL).re();
        let coker_e = null_space(&ec.transpose(), RANK_TOL).re();

        // Complete U where E has zero columns in the left factor.
        let u = complete_orthonormal(&dec.u.re(), n);
        let v = dec.v.re();
        let ac = a.to_complex();
        let balanced = Balanced {
            sigma: (0..n).map(|i| dec.values.get(i).copied().unwrap_or(0.0)).collect(),
            a: &(&u.transpose().to_complex() * &ac) * &v.to_complex(),
            b: &u.transpose().to_complex() * &b.to_complex(),
            c: &c.to_complex() * &v.to_complex(),
        };
        let model = SfosModel {
            e,
            a,
            b,
            c,
            d,
            alpha,
            rank_e,
            ker_e,
            coker_e,
            balanced,
        };
        if !model.pencil_is_regular() {
            return Err(ModelError::IrregularPencil);
        }
        Ok(model)
    }

    pub fn e(&self) -> &RMat {
        &self.e
    }
    pub fn a(&self) -> &RMat {
        &self.a
    }
    pub fn b(&self) -> &RMat {
        &self.b
    }
    pub fn c(&self) -> &RMat {
        &self.c
    }
    pub fn d(&self) -> &RMat {
        &self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.rows()
    }
    /// Input count.
    pub fn m(&self) -> usize {
        self.b.cols()
    }
    /// Output count.
    pub fn p(&self) -> usize {
        self.c.rows()
    }
    pub fn rank_e(&self) -> usize {
        self.rank_e
    }
    /// Orthonormal basis of `ker E` (n×(n−r)).
    pub fn ker_e(&self) -> &RMat {
        &self.ker_e
    }
    /// Orthonormal basis of `ker Eᵀ` (n×(n−r)).
    pub fn coker_e(&self) -> &RMat {
        &self.coker_e
    }

    /// Same dynamics with `A`, `C` replaced.
    pub fn with_a_c(&self, a: RMat, c: RMat) -> Result<Self, ModelError> {
        SfosModel::new(self.e.clone(), a, self.b.clone(), c, self.d.clone(), self.alpha)
    }

    /// Same model with the output matrix scaled by `k`.
    pub fn scale_output(&self, k: f64) -> Result<Self, ModelError> {
        SfosModel::new(
            self.e.clone(),
            self.a.clone(),
            self.b.clone(),
            self.c.scale(k),
            self.d.scale(k),
            self.alpha,
        )
    }

    /// `det(λE − A) ≠ 0` at one or more of eight fixed pseudo-random probes.
    pub fn pencil_is_regular(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let e = self.e.to_complex();
        let a = self.a.to_complex();
        (0..8).any(|_| {
            let lam = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let pencil = &e.scale(lam) - &a;
            condition_number(&pencil) <= CONDITION_CUTOFF
        })
    }

    /// `C(λE − A)⁻¹B + D` at an arbitrary complex `λ`.
    pub fn transfer_at_lambda(&self, lambda: Complex64) -> Result<CMat, NumericsError> {
        let bal = &self.balanced;
        let mut pencil = -&bal.a;
        for (i, &s) in bal.sigma.iter().enumerate() {
            pencil[(i, i)] += lambda * s;
        }
        let x = solve(&pencil, &bal.b)?.x;
        Ok(&(&bal.c * &x) + &self.d.to_complex())
    }

    /// `G(λ(ω))` on the principal sheet.
    pub fn transfer(&self, omega: f64) -> Result<CMat, ModelError> {
        let lambda = lambda_of(omega, self.alpha)?;
        self.transfer_at_lambda(lambda).map_err(|e| match e {
            NumericsError::SingularMatrix { condition } => {
                ModelError::PoleAtFrequency { omega, condition }
            }
            other => ModelError::DimensionMismatch(other.to_string()),
        })
    }

    /// `σ_max(G(λ(ω)))`, infinite at a pole.
    pub fn sigma_max(&self, omega: f64) -> Result<f64, ModelError> {
        match self.transfer(omega) {
            Ok(g) => Ok(max_singular_value(&g)),
            Err(ModelError::PoleAtFrequency { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    /// `σ_max(G(λ))` at an arbitrary `λ`, infinite at a pole.
    pub fn sigma_max_at_lambda(&self, lambda: Complex64) -> f64 {
        match self.transfer_at_lambda(lambda) {
            Ok(g) => max_singular_value(&g),
            Err(_) => f64::INFINITY,
        }
    }
}


/// `e^{jπα/2}·ω^α`.
pub fn lambda_of(omega: f64, alpha: f64) -> Result<Complex64, ModelError> {
    if !(omega >= 0.0) {
        return Err(ModelError::NegativeFrequency(omega));
    }
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::from_polar(omega.powf(alpha), FRAC_PI_2 * alpha))
}

/// Extends the orthonormal columns of `u` (zero columns allowed) to an
/// orthonormal n×n basis.
fn complete_orthonormal(u: &RMat, n: usize) -> RMat {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..u.cols() {
        let col: Vec<f64> = (0..n).map(|i| u[(i, j)]).collect();
        if col.iter().map(|x| x * x).sum::<f64>() > 0.5 {
            cols.push(col);
        }
    }
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= d * ci;
                }
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    RMat::from_fn(n, n, |i, j| cols[j][i])
}
