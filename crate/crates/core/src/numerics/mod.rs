//! Dense linear-algebra kernel shared by every other module.
//!
//! Matrices are small (a few dozen rows at most) and dense, stored row-major.
//! The same generic [`Mat`] backs both the complex matrices used for
//! transfer-matrix and LMI assembly ([`CMat`]) and the real symmetric
//! matrices handed to the feasibility engine after realification ([`RMat`]).

mod decomp;
mod linsolve;

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub use decomp::{
    eig_hermitian, max_singular_value, null_space, rank, singular_values, svd, HermitianEigen, Svd,
};
pub use linsolve::{condition_number, schur_reduce, solve, Solution, CONDITION_CUTOFF};

/// Complex dense matrix.
pub type CMat = Mat<Complex64>;
/// Real dense matrix.
pub type RMat = Mat<f64>;

/// Relative tolerance used when testing for Hermitian symmetry.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix data has {found} entries, expected {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },
    #[error("trailing block is not negative definite (largest eigenvalue {max_eig:.3e})")]
    TrailingBlockNotNegative { max_eig: f64 },
}

/// Field scalar usable as a matrix entry: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn modulus(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::Shape {
                rows,
                cols,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|v| v * k)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `self - selfᴴ`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Hermitian to relative tolerance `tol·‖self‖_F`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_asymmetry() <= tol * self.norm_fro().max(f64::MIN_POSITIVE)
    }

    /// Errors with [`NumericsError::NotHermitian`] unless Hermitian to
    /// [`HERMITIAN_TOL`] relative.
    pub fn check_hermitian(&self) -> Result<(), NumericsError> {
        if !self.is_square() {
            return Err(NumericsError::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let asymmetry = self.hermitian_asymmetry();
        let tolerance = HERMITIAN_TOL * self.norm_fro();
        if asymmetry > tolerance {
            return Err(NumericsError::NotHermitian {
                asymmetry,
                tolerance,
            });
        }
        Ok(())
    }

    /// `(self + selfᴴ) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::from_f64(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    /// `self + selfᴴ`.
    pub fn sym(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + self[(j, i)].conj())
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(
            r0 + block.rows <= self.rows && c0 + block.cols <= self.cols,
            "set_block out of range"
        );
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn column(&self, j: usize) -> Self {
        self.block(0, j, self.rows, 1)
    }

    /// Selects the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    /// Assembles a block matrix; every block row must share its height and
    /// every block column its width.
    pub fn from_blocks(grid: &[Vec<&Self>]) -> Result<Self, NumericsError> {
        let heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = grid
            .first()
            .map(|row| row.iter().map(|b| b.cols).collect())
            .unwrap_or_default();
        for (bi, row) in grid.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(NumericsError::DimensionMismatch(format!(
                    "block row {bi} has {} blocks, expected {}",
                    row.len(),
                    widths.len()
                )));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(NumericsError::DimensionMismatch(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, heights[bi], widths[bj]
                    )));
                }
            }
        }
        let mut out = Self::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                out.set_block(r0, c0, b);
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    pub fn vstack(top: &Self, bottom: &Self) -> Self {
        assert_eq!(top.cols, bottom.cols, "vstack width mismatch");
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        }
    }

    pub fn hstack(left: &Self, right: &Self) -> Self {
        assert_eq!(left.rows, right.rows, "hstack height mismatch");
        let mut out = Self::zeros(left.rows, left.cols + right.cols);
        out.set_block(0, 0, left);
        out.set_block(0, left.cols, right);
        out
    }
}

impl RMat {
    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self, NumericsError> {
        Self::new(rows, cols, data.to_vec())
    }

    pub fn to_complex(&self) -> CMat {
        self.map(|v| Complex64::new(v, 0.0))
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Option<RMat> {
        let n = self.rows;
        if !self.is_square() {
            return None;
        }
        let mut l = RMat::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// Inverse of a symmetric positive definite matrix from its Cholesky
    /// factor.
    pub fn cholesky_inverse(l: &RMat) -> RMat {
        let n = l.rows;
        let mut linv = RMat::zeros(n, n);
        for j in 0..n {
            linv[(j, j)] = 1.0 / l[(j, j)];
            for i in j + 1..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= l[(i, k)] * linv[(k, j)];
                }
                linv[(i, j)] = s / l[(i, i)];
            }
        }
        linv.transpose().matmul(&linv)
    }

    /// Inner product `tr(selfᵀ other)`.
    pub fn dot(&self, other: &RMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

impl CMat {
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, NumericsError> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn re(&self) -> RMat {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> RMat {
        self.map(|v| v.im)
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }
}

/// Eigendecomposition of a real symmetric matrix.
pub fn eig_symmetric(m: &RMat) -> Result<HermitianEigen, NumericsError> {
    eig_hermitian(&m.to_complex())
}

pub(crate) fn eig_symmetric_unchecked(m: &RMat) -> HermitianEigen {
    decomp::eig_hermitian_unchecked(&m.to_complex().hermitian_part())
}

/// Kronecker product: block `(i, j)` of the result is `a[i,j]·b`.
pub fn kron<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    Mat::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// Real symmetric embedding `[[Re h, −Im h], [Im h, Re h]]` of a Hermitian
/// matrix. Every eigenvalue of `h` appears twice in the result.
pub fn realify(h: &CMat) -> Result<RMat, NumericsError> {
    h.check_hermitian()?;
    Ok(realify_unchecked(h))
}

pub(crate) fn realify_unchecked(h: &CMat) -> RMat {
    let n = h.rows;
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let v = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.matmul(rhs)
    }
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|v| -v)
    }
}

impl<T: Scalar> Add for Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: Mat<T>) -> Mat<T> {
        &self + &rhs
    }
}

impl<T: Scalar> Sub for Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: Mat<T>) -> Mat<T> {
        &self - &rhs
    }
}

impl<T: Scalar> Mul for Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: Mat<T>) -> Mat<T> {
        self.matmul(&rhs)
    }
}

impl<T: Scalar> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_cmat(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMat {
        CMat::from_fn(r, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            CMat::from_real(2, 2, &[1.0, 2.0, 3.0]),
            Err(NumericsError::Shape { found: 3, .. })
        ));
        assert!(matches!(
            RMat::from_rows(1, 2, &[1.0, f64::NAN]),
            Err(NumericsError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn kron_identity_and_scalar_blocks() {
        let k = kron(&CMat::identity(2), &CMat::identity(3));
        assert_eq!(k, CMat::identity(6));

        let swap = CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let five = CMat::from_real(1, 1, &[5.0]).unwrap();
        assert_eq!(
            kron(&swap, &five),
            CMat::from_real(2, 2, &[0.0, 5.0, 5.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn kron_mixed_product_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (a, b, cc, d) = (
                random_cmat(&mut rng, 2, 2),
                random_cmat(&mut rng, 2, 2),
                random_cmat(&mut rng, 2, 2),
                random_cmat(&mut rng, 2, 2),
            );
            let lhs = &kron(&a, &b) * &kron(&cc, &d);
            let rhs = kron(&(&a * &cc), &(&b * &d));
            assert!((&lhs - &rhs).max_abs() < 1e-12);
        }
    }

    #[test]
    fn realify_of_real_diagonal_duplicates_spectrum() {
        let h = CMat::from_real(1, 1, &[-2.0]).unwrap();
        assert_eq!(
            realify(&h).unwrap(),
            RMat::from_rows(2, 2, &[-2.0, 0.0, 0.0, -2.0]).unwrap()
        );
    }

    #[test]
    fn realify_rejects_non_hermitian() {
        let m = CMat::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(realify(&m), Err(NumericsError::NotHermitian { .. })));
    }

    #[test]
    fn cholesky_inverse_matches_identity() {
        let a = RMat::from_rows(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let l = a.cholesky().unwrap();
        let inv = RMat::cholesky_inverse(&l);
        assert!((&(&a * &inv) - &RMat::identity(3)).max_abs() < 1e-13);
        assert!(RMat::from_rows(1, 1, &[-1.0]).unwrap().cholesky().is_none());
    }

    #[test]
    fn from_blocks_checks_shapes() {
        let a = CMat::identity(2);
        let b = CMat::zeros(2, 1);
        let c1 = CMat::zeros(1, 2);
        let d = CMat::identity(1);
        let m = CMat::from_blocks(&[vec![&a, &b], vec![&c1, &d]]).unwrap();
        assert_eq!(m, CMat::identity(3));
        assert!(CMat::from_blocks(&[vec![&a, &b], vec![&d, &d]]).is_err());
    }
}
