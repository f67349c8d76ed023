//! State-feedback synthesis `u = v + Kx` for a prescribed L∞ level.

use num_complex::Complex64;
use thiserror::Error;

use crate::band::FrequencyBand;
use crate::lmisolve::{feasibility, pack_variables, AffineLmi, SolveError, SolverOptions, Term, VarKind};
use crate::model::{linf_sweep, ModelError, SfosModel, SweepConfig};
use crate::numerics::{condition_number, solve, CMat, NumericsError, RMat};

#[derive(Debug, Error, Clone)]
pub enum SynthError {
    #[error("delta = {0} must be positive and finite")]
    NonpositiveDelta(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("synthesis LMI not strictly feasible (best phi {best_phi:.3e})")]
    LmiInfeasible { best_phi: f64 },
    #[error("X is numerically singular (condition {condition:.3e})")]
    SingularX { condition: f64 },
    #[error("gain has imaginary residue {residue:.3e}")]
    ComplexGain { residue: f64 },
    #[error("closed-loop norm {closed_loop_norm} does not beat delta = {delta}")]
    VerificationFailed { closed_loop_norm: f64, delta: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Solve(SolveError),
}

/// Algebraic form of the synthesis LMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthForm {
    /// `X = e^{jθ}(P·Eᵀ + N·S·Rᵀ)` with `P` symmetric, which stays
    /// well-posed for singular `E`.
    #[default]
    Corrected,
    /// `sym(AXE + BYE)` with `X = e^{jθ}P`, `Y = e^{jθ}Q`, `P` general.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub solver: SolverOptions,
    pub sweep: SweepConfig,
    pub form: SynthForm,
    /// Extra solves with other seeds after a singular `X`.
    pub retries: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            solver: SolverOptions::default(),
            sweep: SweepConfig::default(),
            form: SynthForm::Corrected,
            retries: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub k: RMat,
    pub p: RMat,
    pub q: RMat,
    /// `X` with the factor `e^{jθ}` removed, so that `K·X = Q`.
    pub x: RMat,
    pub lmi_margin: f64,
    pub closed_loop_norm: f64,
    pub delta: f64,
    pub closed_loop: SfosModel,
}

/// Relative conditioning above which `X` is treated as singular.
pub const SINGULAR_X_CUTOFF: f64 = 1e10;
const REALNESS_TOL: f64 = 1e-8;

fn theta_of(model: &SfosModel) -> f64 {
    std::f64::consts::FRAC_PI_2 * (1.0 - model.alpha())
}

fn real_block(v: &crate::lmisolve::Variables, name: &str) -> RMat {
    v[name].re()
}

/// `[[sym(A·X + B·Y), (C·X + D·Y)ᴴ, B], [C·X + D·Y, −δI, D], [Bᵀ, Dᵀ, −δI]]`.
fn assemble(model: &SfosModel, x: &CMat, y: &CMat, delta: f64) -> CMat {
    let a = model.a().to_complex();
    let b = model.b().to_complex();
    let c = model.c().to_complex();
    let d = model.d().to_complex();
    let m11 = (&(&a * x) + &(&b * y)).sym();
    let m21 = &(&c * x) + &(&d * y);
    let m22 = CMat::identity(model.p()).scale_re(-delta);
    let m33 = CMat::identity(model.m()).scale_re(-delta);
    CMat::from_blocks(&[
        vec![&m11, &m21.adjoint(), &b],
        vec![&m21, &m22, &d],
        vec![&b.adjoint(), &d.adjoint(), &m33],
    ])
    .expect("conforming blocks")
}

/// Synthesis LMI in real variables `P` (symmetric), `S` (on `ker E`) and `Q`.
pub fn synth_lmi(model: &SfosModel, delta: f64) -> Result<AffineLmi, SynthError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(SynthError::NonpositiveDelta(delta));
    }
    let (n, m) = (model.n(), model.m());
    let k = model.ker_e().cols();
    let mut blocks = vec![("P", VarKind::RealSymmetric(n))];
    if k > 0 {
        blocks.push(("S", VarKind::RealGeneral(k, k)));
    }
    blocks.push(("Q", VarKind::RealGeneral(m, n)));
    let eth = Complex64::from_polar(1.0, theta_of(model));
    let model_c = model.clone();
    let et = model.e().transpose().to_complex();
    let nb = model.ker_e().to_complex();
    let rt = model.coker_e().transpose().to_complex();
    Ok(AffineLmi::build(pack_variables(&blocks), move |v| {
        let mut xr = &v["P"] * &et;
        if k > 0 {
            xr = &xr + &(&(&nb * &v["S"]) * &rt);
        }
        let x = xr.scale(eth);
        let y = v["Q"].scale(eth);
        vec![Term::neg("synthesis", assemble(&model_c, &x, &y, delta))]
    })?)
}

/// The synthesis LMI with `sym(AXE + BYE)` and `(CX + DY)E` blocks,
/// `X = e^{jθ}P`, `Y = e^{jθ}Q`, `P` a general real matrix.
pub fn synth_lmi_printed(model: &SfosModel, delta: f64) -> Result<AffineLmi, SynthError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(SynthError::NonpositiveDelta(delta));
    }
    let (n, m) = (model.n(), model.m());
    let blocks = [("P", VarKind::RealGeneral(n, n)), ("Q", VarKind::RealGeneral(m, n))];
    let eth = Complex64::from_polar(1.0, theta_of(model));
    let model_c = model.clone();
    let e = model.e().to_complex();
    Ok(AffineLmi::build(pack_variables(&blocks), move |v| {
        let x = &v["P"].scale(eth) * &e;
        let y = &v["Q"].scale(eth) * &e;
        vec![Term::neg("synthesis", assemble(&model_c, &x, &y, delta))]
    })?)
}

/// `A ← A + BK`, `C ← C + DK`.
pub fn closed_loop(model: &SfosModel, k: &RMat) -> Result<SfosModel, SynthError> {
    if k.shape() != (model.m(), model.n()) {
        return Err(SynthError::DimensionMismatch(format!(
            "K is {}x{}, expected {}x{}",
            k.rows(),
            k.cols(),
            model.m(),
            model.n()
        )));
    }
    let a = model.a() + &(model.b() * k);
    let c = model.c() + &(model.d() * k);
    Ok(model.with_a_c(a, c)?)
}

/// Solves the synthesis LMI, extracts `K = Y·X⁻¹` and verifies the closed
/// loop on the full band.
pub fn synthesize(model: &SfosModel, delta: f64, cfg: &SynthConfig) -> Result<SynthesisResult, SynthError> {
    let lmi = match cfg.form {
        SynthForm::Corrected => synth_lmi(model, delta)?,
        SynthForm::Printed => synth_lmi_printed(model, delta)?,
    };
    let eth = Complex64::from_polar(1.0, theta_of(model));
    let mut last_singular = None;
    for attempt in 0..=cfg.retries {
        let opts = SolverOptions {
            seed: cfg.solver.seed.wrapping_add(attempt as u64),
            ..cfg.solver
        };
        let sol = match feasibility(&lmi, &opts) {
            Ok(s) => s,
            Err(SolveError::Stalled { best_phi, .. }) => {
                return Err(SynthError::LmiInfeasible { best_phi })
            }
            Err(e) => return Err(SynthError::Solve(e)),
        };
        let p = real_block(&sol.variables, "P");
        let q = real_block(&sol.variables, "Q");
        let (xr, yr) = match cfg.form {
            SynthForm::Corrected => {
                let mut xr = &p * &model.e().transpose();
                if let Some(s) = sol.variables.get("S") {
                    xr = &xr + &(&(model.ker_e() * &s.re()) * &model.coker_e().transpose());
                }
                (xr, q.clone())
            }
            SynthForm::Printed => (p.clone(), q.clone()),
        };
        let condition = condition_number(&xr.to_complex());
        if !(condition <= SINGULAR_X_CUTOFF) {
            last_singular = Some(condition);
            continue;
        }
        // K = Y·X⁻¹ = (X⁻ᵀ·Yᵀ)ᵀ, evaluated in complex form so the cancellation
        // of e^{jθ} is checked rather than assumed.
        let xc = xr.to_complex().scale(eth);
        let yc = yr.to_complex().scale(eth);
        let kc = solve(&xc.transpose(), &yc.transpose())?.x.transpose();
        let residue = kc.im().max_abs();
        if !(residue < REALNESS_TOL) {
            return Err(SynthError::ComplexGain { residue });
        }
        let k = kc.re();
        let cl = closed_loop(model, &k)?;
        let closed_loop_norm = linf_sweep(&cl, &FrequencyBand::Full, &cfg.sweep)?.peak_sigma;
        if !(closed_loop_norm < delta) {
            return Err(SynthError::VerificationFailed {
                closed_loop_norm,
                delta,
            });
        }
        return Ok(SynthesisResult {
            k,
            p,
            q,
            x: xr,
            lmi_margin: sol.margin,
            closed_loop_norm,
            delta,
            closed_loop: cl,
        });
    }
    Err(SynthError::SingularX {
        condition: last_singular.unwrap_or(f64::INFINITY),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_gain_is_identity() {
        let m = fixtures::example3();
        let cl = closed_loop(&m, &RMat::zeros(1, 2)).unwrap();
        assert_eq!(cl.a(), m.a());
        assert_eq!(cl.c(), m.c());
        assert_eq!(cl.e(), m.e());
    }

    #[test]
    fn published_gain_closed_loop_matrices() {
        let cl = closed_loop(&fixtures::example3(), &fixtures::example3_published_gain()).unwrap();
        let a = RMat::from_rows(2, 2, &[5.850, -1.084, 6.850, -4.084]).unwrap();
        let c = RMat::from_rows(1, 2, &[2.970, 0.3832]).unwrap();
        assert!((cl.a() - &a).max_abs() < 1e-12);
        assert!((cl.c() - &c).max_abs() < 1e-12);
    }

    #[test]
    fn composition_without_feedthrough() {
        let m = fixtures::example1();
        let k1 = RMat::from_rows(1, 2, &[0.3, -0.2]).unwrap();
        let k2 = RMat::from_rows(1, 2, &[-1.0, 0.7]).unwrap();
        let twice = closed_loop(&closed_loop(&m, &k1).unwrap(), &k2).unwrap();
        let once = closed_loop(&m, &(&k1 + &k2)).unwrap();
        assert!((twice.a() - once.a()).max_abs() < 1e-15);
        assert!((twice.c() - once.c()).max_abs() < 1e-15);
    }

    #[test]
    fn wrong_gain_shape() {
        assert!(matches!(
            closed_loop(&fixtures::example3(), &RMat::zeros(2, 2)),
            Err(SynthError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn example_three_at_unit_bound() {
        let r = synthesize(&fixtures::example3(), 1.0, &SynthConfig::default()).unwrap();
        assert!(r.closed_loop_norm < 1.0);
        assert_eq!(r.k.shape(), (1, 2));
    }

    #[test]
    fn example_three_already_compliant() {
        let r = synthesize(&fixtures::example3(), 3.0, &SynthConfig::default()).unwrap();
        assert!(r.closed_loop_norm < 3.0);
    }

    #[test]
    fn printed_form_is_not_feasible_for_singular_e() {
        let lmi = synth_lmi_printed(&fixtures::example3(), 1.0).unwrap();
        assert!(feasibility(&lmi, &SolverOptions::default()).is_err());
    }

    #[test]
    fn zero_input_and_output_is_feasible() {
        let m = fixtures::example1();
        let m0 = SfosModel::new(
            m.e().clone(),
            m.a().clone(),
            RMat::zeros(2, 1),
            RMat::zeros(1, 2),
            RMat::zeros(1, 1),
            0.5,
        )
        .unwrap();
        for d in [0.1, 1.0] {
            assert!(feasibility(&synth_lmi(&m0, d).unwrap(), &SolverOptions::default()).is_ok());
        }
    }

    #[test]
    fn rejects_nonpositive_delta() {
        assert!(matches!(
            synth_lmi(&fixtures::example3(), -1.0),
            Err(SynthError::NonpositiveDelta(_))
        ));
    }
}
