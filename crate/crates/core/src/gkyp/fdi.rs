//! Sampled frequency-domain inequality `S_λᴴ Θ S_λ ≺ 0` along a band.

use super::GkypError;
use crate::band::FrequencyBand;
use crate::model::{lambda_of, SfosModel};
use crate::numerics::{eig_hermitian, null_space, solve, CMat, NumericsError, RMat};

const OMEGA_FLOOR: f64 = 1e-4;
const OMEGA_CEIL: f64 = 1e6;

/// `true` iff `λ_max(S_λᴴ Θ S_λ) < 0` at `n_samples` log-spaced frequencies of
/// the band, with `S_λ = [(λE − A)⁻¹B; I]`. Unbounded bands also test the
/// limit λ = ∞, where `S_∞` spans the kernel of `[[E, 0], [RᵀA, RᵀB]]`
/// (`R` spanning `ker Eᵀ`); for nonsingular `E` that is `[0; I]`.
pub fn fdi_sample_check(
    model: &SfosModel,
    theta_block: &CMat,
    band: &FrequencyBand,
    n_samples: usize,
) -> Result<bool, GkypError> {
    band.validate()?;
    let n = model.n();
    let m = model.m();
    if theta_block.shape() != (n + m, n + m) {
        return Err(GkypError::DimensionMismatch(format!(
            "theta block is {:?}, expected {}x{}",
            theta_block.shape(),
            n + m,
            n + m
        )));
    }
    theta_block.check_hermitian()?;
    let (lo, hi) = band.range();
    let hi = hi.unwrap_or(OMEGA_CEIL);
    let start = lo.max(OMEGA_FLOOR).min(hi);
    let count = n_samples.max(2);
    let mut omegas: Vec<f64> = (0..count)
        .map(|k| (start.ln() + (hi.ln() - start.ln()) * k as f64 / (count - 1) as f64).exp())
        .collect();
    if lo == 0.0 {
        omegas.insert(0, 0.0);
    }

    let e = model.e().to_complex();
    let a = model.a().to_complex();
    let b = model.b().to_complex();
    for &w in &omegas {
        let lambda = lambda_of(w, model.alpha())?;
        let pencil = &e.scale(lambda) - &a;
        let x = match solve(&pencil, &b) {
            Ok(s) => s.x,
            Err(NumericsError::SingularMatrix { .. }) => {
                return Err(GkypError::PoleAtSample { omega: w })
            }
            Err(err) => return Err(err.into()),
        };
        let s = CMat::vstack(&x, &CMat::identity(m));
        if !negative_definite(&s, theta_block)? {
            return Ok(false);
        }
    }

    if !band.is_bounded() {
        let k = model.coker_e().cols();
        let rt = model.coker_e().transpose();
        let gamma = RMat::from_blocks(&[
            vec![model.e(), &RMat::zeros(n, m)],
            vec![&(&rt * model.a()), &(&rt * model.b())],
        ])
        .expect("conforming blocks");
        debug_assert_eq!(gamma.rows(), n + k);
        let s = null_space(&gamma.to_complex(), 1e-10);
        if s.cols() > 0 && !negative_definite(&s, theta_block)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn negative_definite(s: &CMat, theta: &CMat) -> Result<bool, GkypError> {
    let h = (&(&s.adjoint() * theta) * s).hermitian_part();
    Ok(eig_hermitian(&h)?.max() < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gkyp::bounded_real_theta;

    #[test]
    fn negative_identity_theta_always_passes() {
        for m in [fixtures::example1(), fixtures::example2(), fixtures::example3()] {
            let t = CMat::identity(3).scale_re(-1.0);
            assert!(fdi_sample_check(&m, &t, &FrequencyBand::Full, 64).unwrap());
        }
    }

    #[test]
    fn example_one_low_band() {
        let m = fixtures::example1();
        let band = FrequencyBand::Low { omega_l: 100.0 };
        assert!(fdi_sample_check(&m, &bounded_real_theta(&m, 0.9), &band, 64).unwrap());
        assert!(!fdi_sample_check(&m, &bounded_real_theta(&m, 0.8), &band, 64).unwrap());
    }

    #[test]
    fn infinity_limit_catches_feedthrough() {
        // Example 3 tends to 1.2 at λ = ∞; a top sample of 1e6 is 1.2 to ~1e-2.
        let m = fixtures::example3();
        let theta = bounded_real_theta(&m, 1.2);
        assert!(!fdi_sample_check(&m, &theta, &FrequencyBand::High { omega_h: 1e5 }, 16).unwrap());
    }

    #[test]
    fn pole_is_reported() {
        let m = crate::model::SfosModel::new(
            RMat::identity(1),
            RMat::zeros(1, 1),
            RMat::identity(1),
            RMat::identity(1),
            RMat::zeros(1, 1),
            1.0,
        )
        .unwrap();
        let t = CMat::identity(2).scale_re(-1.0);
        assert!(matches!(
            fdi_sample_check(&m, &t, &FrequencyBand::Full, 8),
            Err(GkypError::PoleAtSample { .. })
        ));
    }
}
