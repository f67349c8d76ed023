use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::GkypError;
use crate::band::FrequencyBand;
use crate::numerics::CMat;

/// Hermitian pair `(Φ, Ψ)` describing a frequency curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub phi: CMat,
    pub psi: CMat,
    /// `π(1 − α)/2`.
    pub theta: f64,
}

impl CurveSpec {
    /// Same `Φ`, conjugated `Ψ`. `Φ` vanishes on the ray `ω^α·e^{−jπα/2}`,
    /// so a `Ψ` written for `λ(ω) = ω^α·e^{jπα/2}` has to be conjugated to
    /// select the intended arc on that ray; for real `Ψ` this is a no-op.
    pub fn mirrored(&self) -> CurveSpec {
        CurveSpec {
            phi: self.phi.clone(),
            psi: self.psi.conj(),
            theta: self.theta,
        }
    }

    /// `(σ(λ, Φ), σ(λ, Ψ))` with `σ(λ, M) = [λ; 1]ᴴ M [λ; 1]`. A point lies
    /// on the curve when the first is zero and the second nonnegative.
    pub fn forms(&self, lambda: Complex64) -> (f64, f64) {
        let form = |m: &CMat| {
            let v = [lambda, Complex64::new(1.0, 0.0)];
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    s += v[i].conj() * m[(i, j)] * v[j];
                }
            }
            s.re
        };
        (form(&self.phi), form(&self.psi))
    }
}

/// Curve matrices for a band at order `alpha`.
pub fn curve_spec(band: &FrequencyBand, alpha: f64) -> Result<CurveSpec, GkypError> {
    band.validate()?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(GkypError::InvalidOrder(alpha));
    }
    let theta = FRAC_PI_2 * (1.0 - alpha);
    let z = Complex64::new(0.0, 0.0);
    let r = |x: f64| Complex64::new(x, 0.0);
    let eth = Complex64::from_polar(1.0, theta);
    let phi = CMat::new(2, 2, vec![z, eth, eth.conj(), z]).expect("2x2");
    let psi = match *band {
        FrequencyBand::Low { omega_l } => {
            CMat::new(2, 2, vec![r(-1.0), z, z, r(omega_l.powf(2.0 * alpha))])
        }
        FrequencyBand::Middle { omega_1, omega_2 } => {
            let (a, b) = (omega_1.powf(alpha), omega_2.powf(alpha));
            let wc = Complex64::from_polar((a + b) / 2.0, FRAC_PI_2 * alpha);
            CMat::new(2, 2, vec![r(-1.0), wc, wc.conj(), r(-a * b)])
        }
        FrequencyBand::High { omega_h } => {
            CMat::new(2, 2, vec![r(1.0), z, z, r(-omega_h.powf(2.0 * alpha))])
        }
        FrequencyBand::Full => Ok(CMat::zeros(2, 2)),
    }
    .expect("2x2");
    Ok(CurveSpec { phi, psi, theta })
}
