//! Generic GKYP LMI and the banded bounded-real LMIs.

use num_complex::Complex64;

use super::curve::{curve_spec, CurveSpec};
use super::GkypError;
use crate::band::FrequencyBand;
use crate::lmisolve::{pack_variables, AffineLmi, Term, VarKind, Variables};
use crate::model::SfosModel;
use crate::numerics::{kron, CMat, RMat};

/// Which algebraic form of the bounded-real LMI to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BrlForm {
    /// Band forms obtained by substituting each curve into the GKYP
    /// inequality, with a kernel term on unbounded bands when `E` is
    /// singular so that the λ = ∞ end of the curve is handled.
    #[default]
    Completed,
    /// The textbook band forms taken literally.
    Printed,
}

/// `Θ(δ) = [[CᵀC, CᵀD], [DᵀC, DᵀD − δ²I]]`.
pub fn bounded_real_theta(model: &SfosModel, delta: f64) -> CMat {
    let c = model.c();
    let d = model.d();
    let ct = c.transpose();
    let dt = d.transpose();
    let d22 = &(&dt * d) - &RMat::identity(model.m()).scale(delta * delta);
    RMat::from_blocks(&[vec![&(&ct * c), &(&ct * d)], vec![&(&dt * c), &d22]])
        .expect("conforming blocks")
        .to_complex()
}

fn check_dims(e: &RMat, a: &RMat, b: &RMat, theta_block: &CMat) -> Result<(), GkypError> {
    let n = a.rows();
    let m = b.cols();
    if e.shape() != (n, n) || a.cols() != n || b.rows() != n {
        return Err(GkypError::DimensionMismatch(format!(
            "E {:?}, A {:?}, B {:?}",
            e.shape(),
            a.shape(),
            b.shape()
        )));
    }
    if theta_block.shape() != (n + m, n + m) {
        return Err(GkypError::DimensionMismatch(format!(
            "theta block is {:?}, expected {}x{}",
            theta_block.shape(),
            n + m,
            n + m
        )));
    }
    Ok(())
}

/// `{Fᴴ(Φ⊗P + Ψ⊗Q)F + Θ ≺ 0, Q ≻ 0}` with `F = [[A, B], [E, 0]]` and
/// `P`, `Q` Hermitian.
pub fn gkyp_lmi(
    e: &RMat,
    a: &RMat,
    b: &RMat,
    theta_block: &CMat,
    curve: &CurveSpec,
) -> Result<AffineLmi, GkypError> {
    gkyp_assemble(e, a, b, theta_block, curve, None)
}

/// [`gkyp_lmi`] plus the term `sym(W·Rᵀ·[A B])` with `W` a free complex
/// `(n+m)×k` matrix and `R` spanning `ker Eᵀ`. Every column of `S_λ`
/// satisfies `Rᵀ(Ax + Bu) = λRᵀEx = 0`, so the extra term vanishes along the
/// whole curve and only relaxes directions with `Ex = 0` that are not limits
/// of the frequency response.
pub fn gkyp_lmi_with_completion(
    model: &SfosModel,
    theta_block: &CMat,
    curve: &CurveSpec,
) -> Result<AffineLmi, GkypError> {
    gkyp_assemble(
        model.e(),
        model.a(),
        model.b(),
        theta_block,
        curve,
        Some(model.coker_e()),
    )
}

fn gkyp_assemble(
    e: &RMat,
    a: &RMat,
    b: &RMat,
    theta_block: &CMat,
    curve: &CurveSpec,
    coker: Option<&RMat>,
) -> Result<AffineLmi, GkypError> {
    check_dims(e, a, b, theta_block)?;
    theta_block.check_hermitian()?;
    let n = a.rows();
    let m = b.cols();
    let f = RMat::from_blocks(&[vec![a, b], vec![e, &RMat::zeros(n, m)]])
        .expect("conforming blocks")
        .to_complex();
    let ft = f.adjoint();
    let k = coker.map_or(0, |r| r.cols());
    let mut blocks = vec![("P", VarKind::HermitianComplex(n)), ("Q", VarKind::HermitianComplex(n))];
    if k > 0 {
        blocks.push(("W_re", VarKind::RealGeneral(n + m, k)));
        blocks.push(("W_im", VarKind::RealGeneral(n + m, k)));
    }
    let rab = coker.map(|r| (&r.transpose() * &RMat::hstack(a, b)).to_complex());
    let phi = curve.phi.clone();
    let psi = curve.psi.clone();
    let theta_block = theta_block.clone();
    let lmi = AffineLmi::build(pack_variables(&blocks), move |v| {
        let mid = &kron(&phi, &v["P"]) + &kron(&psi, &v["Q"]);
        let mut l = &(&(&ft * &mid) * &f) + &theta_block;
        if let (Some(rab), true) = (&rab, k > 0) {
            l = &l + &(&complex_w(v) * rab).sym();
        }
        vec![Term::neg("gkyp", l), Term::pos("Q", v["Q"].clone())]
    })?;
    Ok(lmi)
}

fn complex_w(v: &Variables) -> CMat {
    let re = &v["W_re"];
    let im = &v["W_im"];
    CMat::from_fn(re.rows(), re.cols(), |i, j| {
        Complex64::new(re[(i, j)].re, im[(i, j)].re)
    })
}

/// Bounded-real LMI `‖G‖ < δ` on a band, in 3×3 block form with `−δI`
/// corners:
///
/// ```text
/// [ M₁₁   Yᴴ    Cᵀ  ]
/// [ Y     M₂₂   Dᵀ  ]  ≺ 0,   Q ≻ 0 (bounded bands and High).
/// [ C     D    −δI  ]
/// ```
pub fn bounded_real_lmi(
    model: &SfosModel,
    band: &FrequencyBand,
    delta: f64,
    form: BrlForm,
) -> Result<AffineLmi, GkypError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(GkypError::NonpositiveDelta(delta));
    }
    let curve = curve_spec(band, model.alpha())?;
    let n = model.n();
    let m = model.m();
    let p = model.p();
    let k = model.ker_e().cols();
    let completed = form == BrlForm::Completed && !band.is_bounded() && k > 0;
    let has_q = !matches!(band, FrequencyBand::Full);

    let mut blocks = vec![("P", VarKind::HermitianComplex(n))];
    if has_q {
        blocks.push(("Q", VarKind::HermitianComplex(n)));
    }
    if completed {
        blocks.push(("W_re", VarKind::RealGeneral(n + m, k)));
        blocks.push(("W_im", VarKind::RealGeneral(n + m, k)));
    }

    let e = model.e().to_complex();
    let a = model.a().to_complex();
    let b = model.b().to_complex();
    let c = model.c().to_complex();
    let d = model.d().to_complex();
    let (et, at, bt) = (e.transpose(), a.transpose(), b.transpose());
    let eth = Complex64::from_polar(1.0, curve.theta);
    let alpha = model.alpha();
    let rt = model.coker_e().transpose().to_complex();
    let band = *band;

    let lmi = AffineLmi::build(pack_variables(&blocks), move |v| {
        let pm = &v["P"];
        let (mut m11, mut y, mut m22) = match band {
            FrequencyBand::Full => {
                let x = (&et * pm).scale(eth.conj());
                let m11 = (&x * &a).sym();
                let y = (&x * &b).adjoint();
                (m11, y, CMat::identity(m).scale_re(-delta))
            }
            _ => {
                let q = &v["Q"];
                let qa = q * &a;
                let aqa = &at * &qa;
                let bqa = &bt * &qa;
                let bqb = &(&bt * q) * &b;
                let eqe = &(&et * q) * &e;
                let bpe = &(&(&bt * pm) * &e).scale(eth);
                let mut x = (&at * pm).scale(eth);
                // Signs of AᵀQA (shared by BᵀQB), W and BᵀQA, then the weight of W.
                let (sa, sw, sy, w) = match band {
                    FrequencyBand::Low { omega_l } => (-1.0, 1.0, -1.0, omega_l.powf(2.0 * alpha)),
                    FrequencyBand::Middle { omega_1, omega_2 } => {
                        (-1.0, -1.0, -1.0, omega_1.powf(alpha) * omega_2.powf(alpha))
                    }
                    FrequencyBand::High { omega_h } => {
                        let sy = if form == BrlForm::Printed { -1.0 } else { 1.0 };
                        (1.0, -1.0, sy, omega_h.powf(2.0 * alpha))
                    }
                    FrequencyBand::Full => unreachable!(),
                };
                let mut y = &bqa.scale_re(sy) + bpe;
                if let (FrequencyBand::Middle { omega_1, omega_2 }, BrlForm::Completed) = (band, form) {
                    let wc = Complex64::from_polar(
                        (omega_1.powf(alpha) + omega_2.powf(alpha)) / 2.0,
                        std::f64::consts::FRAC_PI_2 * alpha,
                    );
                    x = &x + &(&at * q).scale(wc.conj());
                    y = &y + &(&(&bt * q) * &e).scale(wc.conj());
                }
                let m11 = &(&(&x * &e).sym() + &aqa.scale_re(sa)) + &eqe.scale_re(sw * w);
                let m22 = &CMat::identity(m).scale_re(-delta) + &bqb.scale_re(sa);
                (m11, y, m22)
            }
        };
        if completed {
            let w = complex_w(v);
            let w1 = &w.block(0, 0, n, k) * &rt;
            let w2 = &w.block(n, 0, m, k) * &rt;
            m11 = &m11 + &(&w1 * &a).sym();
            y = &(&y + &(&w1 * &b).adjoint()) + &(&w2 * &a);
            m22 = &m22 + &(&w2 * &b).sym();
        }
        let m33 = CMat::identity(p).scale_re(-delta);
        let big = CMat::from_blocks(&[
            vec![&m11, &y.adjoint(), &c.adjoint()],
            vec![&y, &m22, &d.adjoint()],
            vec![&c, &d, &m33],
        ])
        .expect("conforming blocks");
        let mut terms = vec![Term::neg("bounded_real", big)];
        if has_q {
            terms.push(Term::pos("Q", v["Q"].clone()));
        }
        terms
    })?;
    debug_assert_eq!(lmi.constraints()[0].size(), n + m + p);
    Ok(lmi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lmisolve::{feasibility, SolverOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn theta_block_of_example_three() {
        let t = bounded_real_theta(&fixtures::example3(), 2.0);
        let want = [4.0, 2.0, 0.4, 2.0, 1.0, 0.2, 0.4, 0.2, 0.04 - 4.0];
        for (g, w) in t.as_slice().iter().zip(want) {
            assert!((g.re - w).abs() < 1e-14 && g.im == 0.0);
        }
    }

    #[test]
    fn constant_term_feasibility() {
        let m = fixtures::example1();
        let curve = curve_spec(&FrequencyBand::Full, 0.5).unwrap();
        let theta = CMat::identity(3).scale_re(-1.0);
        let lmi = gkyp_lmi(m.e(), m.a(), m.b(), &theta, &curve).unwrap();
        assert!(feasibility(&lmi, &SolverOptions::default()).is_ok());
    }

    #[test]
    fn assembled_constraints_are_hermitian_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bands = [
            FrequencyBand::Low { omega_l: 100.0 },
            FrequencyBand::Middle { omega_1: 1.0, omega_2: 4.0 },
            FrequencyBand::High { omega_h: 20.0 },
            FrequencyBand::Full,
        ];
        for model in [fixtures::example1(), fixtures::example2(), fixtures::example3()] {
            for band in &bands {
                for form in [BrlForm::Completed, BrlForm::Printed] {
                    let lmi = bounded_real_lmi(&model, band, 0.9, form).unwrap();
                    for _ in 0..100 {
                        let x: Vec<f64> = (0..lmi.dim()).map(|_| rng.gen_range(-5.0..5.0)).collect();
                        for m in lmi.evaluate(&x) {
                            assert!(m.is_hermitian(1e-10));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn affinity_of_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let lmi = bounded_real_lmi(&fixtures::example3(), &FrequencyBand::Full, 1.5, BrlForm::Completed).unwrap();
        let d = lmi.dim();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let zero = vec![0.0; d];
        let (fx, fy, f0, fxy) = (lmi.evaluate(&x), lmi.evaluate(&y), lmi.evaluate(&zero), lmi.evaluate(&xy));
        for i in 0..fx.len() {
            let lhs = &(&fx[i] + &fy[i]) - &f0[i];
            assert!((&lhs - &fxy[i]).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let r = bounded_real_lmi(&fixtures::example1(), &FrequencyBand::Full, 0.0, BrlForm::Completed);
        assert!(matches!(r, Err(GkypError::NonpositiveDelta(_))));
    }

    #[test]
    fn gkyp_dimension_mismatch() {
        let m = fixtures::example1();
        let curve = curve_spec(&FrequencyBand::Full, 0.5).unwrap();
        let r = gkyp_lmi(m.e(), m.a(), m.b(), &CMat::identity(2), &curve);
        assert!(matches!(r, Err(GkypError::DimensionMismatch(_))));
    }
}
