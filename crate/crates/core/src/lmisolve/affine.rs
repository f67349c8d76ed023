//! Decision-variable packing and affine Hermitian-valued maps.

use std::ops::Index;

use num_complex::Complex64;

use crate::numerics::{CMat, NumericsError};

/// Shape of one named decision-variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// n×n complex Hermitian, n² real scalars.
    HermitianComplex(usize),
    /// rows×cols real, one scalar per entry.
    RealGeneral(usize, usize),
    /// n×n real symmetric, n(n+1)/2 scalars.
    RealSymmetric(usize),
}

impl VarKind {
    pub fn dimension(&self) -> usize {
        match *self {
            VarKind::HermitianComplex(n) => n * n,
            VarKind::RealGeneral(r, c) => r * c,
            VarKind::RealSymmetric(n) => n * (n + 1) / 2,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match *self {
            VarKind::HermitianComplex(n) | VarKind::RealSymmetric(n) => (n, n),
            VarKind::RealGeneral(r, c) => (r, c),
        }
    }

    /// Basis matrices in packing order. Hermitian blocks list the diagonal
    /// units, then `E_ij + E_ji`, then `j·E_ij − j·E_ji` for `i < j`.
    pub fn basis(&self) -> Vec<CMat> {
        let one = Complex64::new(1.0, 0.0);
        let unit = |r: usize, c: usize, entries: &[(usize, usize, Complex64)]| {
            let mut m = CMat::zeros(r, c);
            for &(i, j, v) in entries {
                m[(i, j)] = v;
            }
            m
        };
        match *self {
            VarKind::HermitianComplex(n) => {
                let mut out: Vec<CMat> = (0..n).map(|i| unit(n, n, &[(i, i, one)])).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(unit(n, n, &[(i, j, one), (j, i, one)]));
                    }
                }
                let im = Complex64::new(0.0, 1.0);
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(unit(n, n, &[(i, j, im), (j, i, -im)]));
                    }
                }
                out
            }
            VarKind::RealGeneral(r, c) => (0..r * c).map(|k| unit(r, c, &[(k / c, k % c, one)])).collect(),
            VarKind::RealSymmetric(n) => {
                let mut out: Vec<CMat> = (0..n).map(|i| unit(n, n, &[(i, i, one)])).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(unit(n, n, &[(i, j, one), (j, i, one)]));
                    }
                }
                out
            }
        }
    }

    fn unpack(&self, x: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.shape().0, self.shape().1);
        for (b, &v) in self.basis().iter().zip(x) {
            if v != 0.0 {
                m = &m + &b.scale_re(v);
            }
        }
        m
    }

    fn pack(&self, m: &CMat) -> Vec<f64> {
        match *self {
            VarKind::HermitianComplex(n) => {
                let mut out: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(m[(i, j)].re);
                    }
                }
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(m[(i, j)].im);
                    }
                }
                out
            }
            VarKind::RealGeneral(_, _) => m.as_slice().iter().map(|v| v.re).collect(),
            VarKind::RealSymmetric(n) => {
                let mut out: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(m[(i, j)].re);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarBlock {
    pub name: String,
    pub kind: VarKind,
    pub offset: usize,
}

/// Packing of named blocks into one real decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VarLayout {
    blocks: Vec<VarBlock>,
    dim: usize,
}

/// Lays out the blocks consecutively in the given order.
pub fn pack_variables(blocks: &[(&str, VarKind)]) -> VarLayout {
    let mut offset = 0;
    let blocks = blocks
        .iter()
        .map(|&(name, kind)| {
            let b = VarBlock {
                name: name.to_string(),
                kind,
                offset,
            };
            offset += kind.dimension();
            b
        })
        .collect();
    VarLayout { blocks, dim: offset }
}

impl VarLayout {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[VarBlock] {
        &self.blocks
    }

    pub fn unpack(&self, x: &[f64]) -> Variables {
        assert_eq!(x.len(), self.dim, "decision vector length");
        Variables {
            values: self
                .blocks
                .iter()
                .map(|b| {
                    let s = &x[b.offset..b.offset + b.kind.dimension()];
                    (b.name.clone(), b.kind.unpack(s))
                })
                .collect(),
        }
    }

    /// Inverse of [`unpack`](Self::unpack) on conforming matrices; the
    /// anti-Hermitian or non-real part of an argument is discarded.
    pub fn pack(&self, vars: &Variables) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for b in &self.blocks {
            let m = &vars[b.name.as_str()];
            x[b.offset..b.offset + b.kind.dimension()].copy_from_slice(&b.kind.pack(m));
        }
        x
    }
}

/// Named matrix values of the decision blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Variables {
    values: Vec<(String, CMat)>,
}

impl Variables {
    pub fn from_pairs(values: Vec<(String, CMat)>) -> Self {
        Variables { values }
    }

    pub fn get(&self, name: &str) -> Option<&CMat> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CMat)> {
        self.values.iter().map(|(n, m)| (n.as_str(), m))
    }
}

impl Index<&str> for Variables {
    type Output = CMat;
    fn index(&self, name: &str) -> &CMat {
        self.get(name)
            .unwrap_or_else(|| panic!("no decision block named {name}"))
    }
}

/// Required sign of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `F(x) ≺ 0`.
    NegativeDefinite,
    /// `F(x) ≻ 0`.
    PositiveDefinite,
}

impl Sense {
    pub fn sign(&self) -> f64 {
        match self {
            Sense::NegativeDefinite => 1.0,
            Sense::PositiveDefinite => -1.0,
        }
    }
}

/// `F(x) = F₀ + Σ x_k F_k`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub sense: Sense,
    pub constant: CMat,
    pub coeffs: Vec<CMat>,
}

impl Constraint {
    pub fn size(&self) -> usize {
        self.constant.rows()
    }

    pub fn evaluate(&self, x: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for (c, &v) in self.coeffs.iter().zip(x) {
            if v != 0.0 {
                m = &m + &c.scale_re(v);
            }
        }
        m
    }
}

/// A list of affine Hermitian-valued constraints over one decision vector.
#[derive(Debug, Clone)]
pub struct AffineLmi {
    layout: VarLayout,
    constraints: Vec<Constraint>,
}

/// One constraint as returned by an assembly closure.
pub struct Term {
    pub name: &'static str,
    pub sense: Sense,
    pub value: CMat,
}

impl Term {
    pub fn neg(name: &'static str, value: CMat) -> Self {
        Term {
            name,
            sense: Sense::NegativeDefinite,
            value,
        }
    }

    pub fn pos(name: &'static str, value: CMat) -> Self {
        Term {
            name,
            sense: Sense::PositiveDefinite,
            value,
        }
    }
}

/// Relative tolerance for Hermitian symmetry of assembled constraints.
const ASSEMBLY_TOL: f64 = 1e-10;

impl AffineLmi {
    /// Extracts the affine map computed by `f` by evaluating it at the origin
    /// and at every unit vector. `f` must be affine in the variables and must
    /// return Hermitian matrices.
    pub fn build(
        layout: VarLayout,
        f: impl Fn(&Variables) -> Vec<Term>,
    ) -> Result<Self, NumericsError> {
        let dim = layout.dim();
        let mut x = vec![0.0; dim];
        let base = f(&layout.unpack(&x));
        for t in &base {
            check_term(t)?;
        }
        let mut constraints: Vec<Constraint> = base
            .into_iter()
            .map(|t| Constraint {
                name: t.name.to_string(),
                sense: t.sense,
                constant: t.value.hermitian_part(),
                coeffs: Vec::with_capacity(dim),
            })
            .collect();
        for k in 0..dim {
            x[k] = 1.0;
            let at = f(&layout.unpack(&x));
            x[k] = 0.0;
            if at.len() != constraints.len() {
                return Err(NumericsError::DimensionMismatch(
                    "assembly returned a varying number of constraints".into(),
                ));
            }
            for (c, t) in constraints.iter_mut().zip(at) {
                check_term(&t)?;
                if t.value.shape() != c.constant.shape() {
                    return Err(NumericsError::DimensionMismatch(format!(
                        "constraint {} changes shape",
                        c.name
                    )));
                }
                c.coeffs.push(&t.value.hermitian_part() - &c.constant);
            }
        }
        Ok(AffineLmi {
            layout,
            constraints,
        })
    }

    pub fn layout(&self) -> &VarLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<CMat> {
        self.constraints.iter().map(|c| c.evaluate(x)).collect()
    }

    /// Every constraint map multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Self {
        AffineLmi {
            layout: self.layout.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    name: c.name.clone(),
                    sense: c.sense,
                    constant: c.constant.scale_re(k),
                    coeffs: c.coeffs.iter().map(|m| m.scale_re(k)).collect(),
                })
                .collect(),
        }
    }

    /// Direct construction from explicit coefficient matrices.
    pub fn from_constraints(
        layout: VarLayout,
        constraints: Vec<Constraint>,
    ) -> Result<Self, NumericsError> {
        for c in &constraints {
            if c.coeffs.len() != layout.dim() {
                return Err(NumericsError::DimensionMismatch(format!(
                    "constraint {} has {} coefficients, layout has {}",
                    c.name,
                    c.coeffs.len(),
                    layout.dim()
                )));
            }
            for m in std::iter::once(&c.constant).chain(&c.coeffs) {
                if m.shape() != c.constant.shape() {
                    return Err(NumericsError::DimensionMismatch(format!(
                        "constraint {} mixes shapes",
                        c.name
                    )));
                }
                m.check_hermitian()?;
            }
        }
        Ok(AffineLmi {
            layout,
            constraints,
        })
    }
}

fn check_term(t: &Term) -> Result<(), NumericsError> {
    let v = &t.value;
    if !v.is_hermitian(ASSEMBLY_TOL) {
        return Err(NumericsError::NotHermitian {
            asymmetry: v.hermitian_asymmetry(),
            tolerance: ASSEMBLY_TOL * v.norm_fro(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn packing_dimensions() {
        assert_eq!(pack_variables(&[("P", VarKind::HermitianComplex(1))]).dim(), 1);
        assert_eq!(pack_variables(&[("P", VarKind::HermitianComplex(2))]).dim(), 4);
        assert_eq!(pack_variables(&[("K", VarKind::RealGeneral(2, 3))]).dim(), 6);
        assert_eq!(pack_variables(&[("S", VarKind::RealSymmetric(3))]).dim(), 6);
        let l = pack_variables(&[("P", VarKind::HermitianComplex(2)), ("Q", VarKind::RealGeneral(1, 2))]);
        assert_eq!(l.blocks()[1].offset, 4);
    }

    #[test]
    fn hermitian_basis_of_order_two() {
        let b = VarKind::HermitianComplex(2).basis();
        let want = [
            CMat::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap(),
            CMat::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap(),
            CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
            CMat::new(2, 2, vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]).unwrap(),
        ];
        assert_eq!(b.len(), 4);
        for (x, y) in b.iter().zip(&want) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn real_general_uses_unit_entries() {
        let b = VarKind::RealGeneral(2, 3).basis();
        assert_eq!(b.len(), 6);
        assert_eq!(b[4][(1, 1)], c(1.0, 0.0));
        assert_eq!(b[4].norm_fro(), 1.0);
    }

    #[test]
    fn build_extracts_affine_map() {
        let layout = pack_variables(&[("x", VarKind::RealGeneral(1, 1))]);
        let lmi = AffineLmi::build(layout, |v| {
            let x = v["x"][(0, 0)];
            vec![Term::neg("c", CMat::new(1, 1, vec![x * 2.0 - 1.0]).unwrap())]
        })
        .unwrap();
        let c0 = &lmi.constraints()[0];
        assert_eq!(c0.constant[(0, 0)], c(-1.0, 0.0));
        assert_eq!(c0.coeffs[0][(0, 0)], c(2.0, 0.0));
        assert_eq!(lmi.evaluate(&[3.0])[0][(0, 0)], c(5.0, 0.0));
    }

    #[test]
    fn build_rejects_non_hermitian_assembly() {
        let layout = pack_variables(&[("x", VarKind::RealGeneral(1, 1))]);
        let r = AffineLmi::build(layout, |v| {
            let x = v["x"][(0, 0)];
            vec![Term::neg(
                "bad",
                CMat::new(2, 2, vec![x, c(1.0, 0.0), c(0.0, 0.0), x]).unwrap(),
            )]
        });
        assert!(matches!(r, Err(NumericsError::NotHermitian { .. })));
    }
}
