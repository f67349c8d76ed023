use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandError {
    #[error("band parameter {name} = {value} must be positive and finite")]
    NonPositive { name: &'static str, value: f64 },
    #[error("middle band needs omega1 < omega2, got {omega_1} >= {omega_2}")]
    Unordered { omega_1: f64, omega_2: f64 },
}

/// Frequency range (rad/s) over which a bound is sought.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyBand {
    /// `0 ≤ ω ≤ omega_l`.
    Low { omega_l: f64 },
    /// `omega_1 ≤ ω ≤ omega_2`.
    Middle { omega_1: f64, omega_2: f64 },
    /// `ω ≥ omega_h`.
    High { omega_h: f64 },
    /// `ω ≥ 0`.
    Full,
}

impl FrequencyBand {
    pub fn low(omega_l: f64) -> Result<Self, BandError> {
        let b = FrequencyBand::Low { omega_l };
        b.validate()?;
        Ok(b)
    }

    pub fn middle(omega_1: f64, omega_2: f64) -> Result<Self, BandError> {
        let b = FrequencyBand::Middle { omega_1, omega_2 };
        b.validate()?;
        Ok(b)
    }

    pub fn high(omega_h: f64) -> Result<Self, BandError> {
        let b = FrequencyBand::High { omega_h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BandError> {
        fn pos(name: &'static str, value: f64) -> Result<(), BandError> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(BandError::NonPositive { name, value })
            }
        }
        match *self {
            FrequencyBand::Low { omega_l } => pos("omega_l", omega_l),
            FrequencyBand::Middle { omega_1, omega_2 } => {
                pos("omega_1", omega_1)?;
                pos("omega_2", omega_2)?;
                if omega_1 >= omega_2 {
                    return Err(BandError::Unordered { omega_1, omega_2 });
                }
                Ok(())
            }
            FrequencyBand::High { omega_h } => pos("omega_h", omega_h),
            FrequencyBand::Full => Ok(()),
        }
    }

    /// Lower edge and, for bounded bands, upper edge.
    pub fn range(&self) -> (f64, Option<f64>) {
        match *self {
            FrequencyBand::Low { omega_l } => (0.0, Some(omega_l)),
            FrequencyBand::Middle { omega_1, omega_2 } => (omega_1, Some(omega_2)),
            FrequencyBand::High { omega_h } => (omega_h, None),
            FrequencyBand::Full => (0.0, None),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.range().1.is_some()
    }

    pub fn contains(&self, omega: f64) -> bool {
        let (lo, hi) = self.range();
        omega >= lo && hi.is_none_or(|h| omega <= h)
    }
}

impl fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FrequencyBand::Low { omega_l } => write!(f, "low [0, {omega_l}]"),
            FrequencyBand::Middle { omega_1, omega_2 } => write!(f, "middle [{omega_1}, {omega_2}]"),
            FrequencyBand::High { omega_h } => write!(f, "high [{omega_h}, inf)"),
            FrequencyBand::Full => write!(f, "full [0, inf)"),
        }
    }
}
