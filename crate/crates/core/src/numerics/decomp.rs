//! Jacobi-type decompositions: Hermitian eigenproblem and one-sided SVD.

use num_complex::Complex64;

use super::{CMat, NumericsError};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column k pairs with `values[k]`.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn max(&self) -> f64 {
        *self.values.last().unwrap_or(&f64::NEG_INFINITY)
    }

    pub fn min(&self) -> f64 {
        *self.values.first().unwrap_or(&f64::INFINITY)
    }
}

/// Rotation that annihilates the (p, q) entry of the Hermitian 2×2 block
/// `[[app, apq], [conj(apq), aqq]]`. Returns `(c, s, u)` with `u` the phase of
/// `apq`; the unitary acts on columns as
/// `col_p ← c·col_p − s·ū·col_q`, `col_q ← s·col_p + c·ū·col_q`.
fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64) -> (f64, f64, Complex64) {
    let b = apq.norm();
    let u = apq / b;
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c, u)
}

fn rotate_columns(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, ubar: Complex64) {
    for i in 0..m.rows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)] * ubar;
        m[(i, p)] = xp * c - xq * s;
        m[(i, q)] = xp * s + xq * c;
    }
}

fn rotate_rows(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, u: Complex64) {
    for j in 0..m.cols() {
        let xp = m[(p, j)];
        let xq = m[(q, j)] * u;
        m[(p, j)] = xp * c - xq * s;
        m[(q, j)] = xp * s + xq * c;
    }
}

fn off_diagonal_norm(a: &CMat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
pub fn eig_hermitian(h: &CMat) -> Result<HermitianEigen, NumericsError> {
    h.check_hermitian()?;
    Ok(eig_hermitian_unchecked(&h.hermitian_part()))
}

pub(crate) fn eig_hermitian_unchecked(h: &CMat) -> HermitianEigen {
    let n = h.rows();
    let mut a = h.clone();
    let mut v = CMat::identity(n);
    let scale = a.norm_fro();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let (c, s, u) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                    rotate_columns(&mut a, p, q, c, s, u.conj());
                    rotate_rows(&mut a, p, q, c, s, u);
                    rotate_columns(&mut v, p, q, c, s, u.conj());
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    a[(p, p)].im = 0.0;
                    a[(q, q)].im = 0.0;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    HermitianEigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: v.select_columns(&order),
    }
}

#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending.
    pub values: Vec<f64>,
    /// Left singular vectors, m×k with k = min(m, n); columns belonging to zero
    /// singular values are zero.
    pub u: CMat,
    /// Right singular vectors, n×n unitary; the first k columns pair with
    /// `values`, the rest span part of the null space.
    pub v: CMat,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &CMat) -> Svd {
    let (rows, n) = m.shape();
    let mut w = m.clone();
    let mut v = CMat::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() <= 1e-300 {
                    continue;
                }
                rotated = true;
                let (c, s, u) = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, c, s, u.conj());
                rotate_columns(&mut v, p, q, c, s, u.conj());
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..rows).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let k = rows.min(n);
    let values: Vec<f64> = order[..k].iter().map(|&j| norms[j]).collect();
    let u = CMat::from_fn(rows, k, |i, c| {
        let j = order[c];
        if norms[j] > 0.0 {
            w[(i, j)] / norms[j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Svd {
        values,
        u,
        v: v.select_columns(&order),
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd(m).values
}

/// Largest singular value (0 for an empty matrix).
pub fn max_singular_value(m: &CMat) -> f64 {
    match m.shape() {
        (0, _) | (_, 0) => 0.0,
        (1, _) | (_, 1) => m.norm_fro(),
        _ => svd(m).values[0],
    }
}

/// Numerical rank with relative threshold `rtol·σ_max`.
pub fn rank(m: &CMat, rtol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rtol * top && x > 0.0).count()
}

/// Orthonormal basis (as columns) of the right null space of `m`, with
/// singular values at or below `rtol·σ_max` treated as zero.
pub fn null_space(m: &CMat, rtol: f64) -> CMat {
    let n = m.cols();
    let d = svd(m);
    let r = rank(m, rtol).min(d.values.len());
    let keep: Vec<usize> = (r..n).collect();
    d.v.select_columns(&keep)
}
