use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point scalar used by the agreement and evaluation measures: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumCast + Debug + Display + Send + Sync + 'static {
    /// Exact conversion of a count. Counts above 2^24 lose precision in `f32`.
    fn from_count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count representable as float")
    }

    /// Ratio of two counts computed with a single rounding.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    /// Rounds to `places` decimal digits, half away from zero.
    fn round_to(self, places: i32) -> Self {
        let scale = Self::from_f64(10f64.powi(places)).unwrap();
        (self * scale).round() / scale
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(0.907_913_669_f64.round_to(3), 0.908);
        assert_eq!(0.044_124_f32.round_to(3), 0.044);
    }

    #[test]
    fn ratio_single_rounding() {
        assert_eq!(f64::ratio(3, 4), 0.75);
        assert_eq!(f32::ratio(1, 8), 0.125);
    }
}
