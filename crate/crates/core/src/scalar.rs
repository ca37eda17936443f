//! Floating point abstraction shared by every estimator in the crate.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::{Debug, Display};

/// Floating point types the estimators can run on.
///
/// Implemented for `f32` and `f64`. The statistics take logarithms of
/// efficiency ratios, so a field with `ln` is required; exact rational types
/// are not supported.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// `floor(ln(Self::MAX))`: 709 for `f64`, 88 for `f32`.
    fn log_max() -> Self {
        Self::max_value().ln().floor()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Ceiling of a product that is nominally an integer, guarding against
/// representation error (e.g. `0.1 * 30 = 3.0000000000000004`).
pub(crate) fn ceil_index(level: f64, n: usize) -> usize {
    let raw = level * n as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() <= 1e-9 * raw.abs().max(1.0) {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_max_per_width() {
        assert_eq!(f64::log_max(), 709.0);
        assert_eq!(f32::log_max(), 88.0);
    }

    #[test]
    fn ceil_index_absorbs_rounding() {
        assert_eq!(ceil_index(0.1, 30), 3);
        assert_eq!(ceil_index(0.1, 10), 1);
        assert_eq!(ceil_index(0.8, 5), 4);
        assert_eq!(ceil_index(0.15, 10), 2);
        assert_eq!(ceil_index(0.0, 10), 0);
    }
}
