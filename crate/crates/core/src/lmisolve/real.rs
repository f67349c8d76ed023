//! Realified, sense-normalized form of an [`AffineLmi`] used by both engines.
//!
//! Constraint `i` becomes `G_i(x) = s_i·realify(F_i(x)) / (1 + ‖F_i0‖_F)`
//! with `s_i = +1` for `≺ 0` and `−1` for `≻ 0`; the original system holds
//! strictly with the required margin iff `λ_max(G_i(x)) < −ε` for all `i`.

use super::affine::AffineLmi;
use crate::numerics::{realify_unchecked, RMat};

pub(crate) struct RealBlock {
    pub g0: RMat,
    /// `(k, G_k)` for the nonzero coefficients only.
    pub gk: Vec<(usize, RMat)>,
}

impl RealBlock {
    pub fn size(&self) -> usize {
        self.g0.rows()
    }

    pub fn eval(&self, x: &[f64]) -> RMat {
        let mut m = self.g0.clone();
        let n = m.rows();
        for (k, g) in &self.gk {
            let v = x[*k];
            if v == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v * g[(i, j)];
                }
            }
        }
        m
    }
}

pub(crate) struct RealProblem {
    pub dim: usize,
    pub blocks: Vec<RealBlock>,
}

impl RealProblem {
    pub fn from_lmi(lmi: &AffineLmi) -> Self {
        let blocks = lmi
            .constraints()
            .iter()
            .map(|c| {
                let w = c.sense.sign() / (1.0 + c.constant.norm_fro());
                RealBlock {
                    g0: realify_unchecked(&c.constant).scale(w),
                    gk: c
                        .coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, m)| m.max_abs() > 0.0)
                        .map(|(k, m)| (k, realify_unchecked(m).scale(w)))
                        .collect(),
                }
            })
            .collect();
        RealProblem {
            dim: lmi.dim(),
            blocks,
        }
    }

    /// Total barrier degree `Σ size_i`.
    pub fn degree(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).sum()
    }
}
