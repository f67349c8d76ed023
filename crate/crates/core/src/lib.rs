//! Analysis toolkit for singular fractional-order systems
//! `E·D^α x = A x + B u`, `y = C x + D u`: L∞ norms by frequency sweep,
//! generalized KYP bounded-real LMIs on frequency bands, norm bisection and
//! state-feedback synthesis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod fixtures;
pub mod gkyp;
pub mod model;
pub mod lmisolve;
pub mod numerics;
pub mod synth;

pub use band::{BandError, FrequencyBand};
pub use model::{lambda_of, linf_sweep, ModelError, SfosModel, SweepConfig, SweepResult};
