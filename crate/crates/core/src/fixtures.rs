//! The three worked examples used throughout the tests, and the published
//! gain for the third.

use crate::model::SfosModel;
use crate::numerics::RMat;

fn m(rows: usize, cols: usize, data: &[f64]) -> RMat {
    RMat::from_rows(rows, cols, data).expect("fixture data is well formed")
}

/// `G(λ) = 3/(λ − 5)`, α = 0.5.
pub fn example1() -> SfosModel {
    SfosModel::new(
        m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        m(2, 2, &[1.0, 2.0, 2.0, -1.0]),
        m(2, 1, &[1.0, 0.0]),
        m(1, 2, &[1.0, 1.0]),
        m(1, 1, &[0.0]),
        0.5,
    )
    .expect("example 1 is valid")
}

/// `G(λ) = −λ`, α = 0.2; unbounded on the full band.
pub fn example2() -> SfosModel {
    SfosModel::new(
        m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        m(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        m(2, 1, &[0.0, 1.0]),
        m(1, 2, &[0.0, 1.0]),
        m(1, 1, &[0.0]),
        0.2,
    )
    .expect("example 2 is valid")
}

/// `G(λ) = 1.2(λ + 5)/(λ − 5)`, α = 0.5.
pub fn example3() -> SfosModel {
    SfosModel::new(
        m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        m(2, 2, &[1.0, 2.0, 2.0, -1.0]),
        m(2, 1, &[1.0, 1.0]),
        m(1, 2, &[2.0, 1.0]),
        m(1, 1, &[0.2]),
        0.5,
    )
    .expect("example 3 is valid")
}

/// Published state-feedback gain for [`example3`].
pub fn example3_published_gain() -> RMat {
    m(1, 2, &[4.850, -3.084])
}
