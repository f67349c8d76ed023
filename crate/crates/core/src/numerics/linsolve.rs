//! LU solves with a condition estimate, and Schur complements.

use num_complex::Complex64;

use super::decomp::eig_hermitian_unchecked;
use super::{CMat, NumericsError};

/// Condition estimate above which a solve is reported as singular.
pub const CONDITION_CUTOFF: f64 = 1e12;
const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: CMat,
    /// 1-norm condition estimate of the (row-equilibrated) system matrix.
    pub condition: f64,
}

struct Lu {
    lu: CMat,
    perm: Vec<usize>,
}

fn lu_factor(a: &CMat) -> Result<Lu, NumericsError> {
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(mag > PIVOT_FLOOR) {
            return Err(NumericsError::SingularMatrix {
                condition: f64::INFINITY,
            });
        }
        if piv != k {
            perm.swap(piv, k);
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl Lu {
    fn solve(&self, b: &CMat) -> CMat {
        let n = self.lu.rows();
        let mut x = CMat::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        x
    }
}

fn norm1(m: &CMat) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a·x = b`. Rows are equilibrated before factoring, and the
/// condition number reported is that of the equilibrated matrix, which is
/// what governs the accuracy of the computed `x`.
pub fn solve(a: &CMat, b: &CMat) -> Result<Solution, NumericsError> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(NumericsError::DimensionMismatch(format!(
            "solve: a is {}x{}, b is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Solution {
            x: b.clone(),
            condition: 1.0,
        });
    }
    let mut scaled = a.clone();
    let mut rhs = b.clone();
    for i in 0..n {
        let r = (0..n).map(|j| a[(i, j)].norm()).fold(0.0, f64::max);
        if !(r > PIVOT_FLOOR) {
            return Err(NumericsError::SingularMatrix {
                condition: f64::INFINITY,
            });
        }
        for j in 0..n {
            scaled[(i, j)] /= r;
        }
        for j in 0..b.cols() {
            rhs[(i, j)] /= r;
        }
    }
    let lu = lu_factor(&scaled)?;
    let inv = lu.solve(&CMat::identity(n));
    let condition = norm1(&scaled) * norm1(&inv);
    if !(condition <= CONDITION_CUTOFF) {
        return Err(NumericsError::SingularMatrix { condition });
    }
    Ok(Solution {
        x: lu.solve(&rhs),
        condition,
    })
}

/// 1-norm condition number of `a` (infinite when singular).
pub fn condition_number(a: &CMat) -> f64 {
    let n = a.rows();
    match lu_factor(a) {
        Ok(lu) => {
            let inv = lu.solve(&CMat::identity(n));
            let c = norm1(a) * norm1(&inv);
            if c.is_finite() {
                c
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Schur complement `M₁₁ − M₁₂·M₂₂⁻¹·M₂₁` of the Hermitian `block` split at
/// row/column `split`. The trailing block must be negative definite.
pub fn schur_reduce(block: &CMat, split: usize) -> Result<CMat, NumericsError> {
    block.check_hermitian()?;
    let n = block.rows();
    if split > n {
        return Err(NumericsError::DimensionMismatch(format!(
            "split {split} exceeds dimension {n}"
        )));
    }
    let m11 = block.block(0, 0, split, split);
    let m12 = block.block(0, split, split, n - split);
    let m22 = block.block(split, split, n - split, n - split);
    if n == split {
        return Ok(m11);
    }
    let max_eig = eig_hermitian_unchecked(&m22.hermitian_part()).max();
    if max_eig >= 0.0 {
        return Err(NumericsError::TrailingBlockNotNegative { max_eig });
    }
    let y = solve(&m22, &m12.adjoint())?.x;
    Ok((&m11 - &(&m12 * &y)).hermitian_part())
}
