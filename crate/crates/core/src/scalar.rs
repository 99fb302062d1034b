//! Scalar abstraction for the numeric pipeline.
//!
//! All feature aggregation, standardization, outlier scoring and metric
//! arithmetic is generic over [`Scalar`], so the pipeline runs on `f32` or
//! `f64` without code changes. The CLI and the concrete aliases at the crate
//! root fix the type to `f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the pipeline.
///
/// `FromStr` covers CSV ingestion, `Display` covers emission; the remaining
/// bounds are what the numeric kernels need.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
    /// Lossless conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implemented_for_both_float_widths() {
        fn take<F: Scalar>(x: F) -> F {
            x + F::one()
        }
        assert_eq!(take(1.0f32), 2.0f32);
        assert_eq!(take(1.0f64), 2.0f64);
        assert_eq!(f64::from_count(25), 25.0);
    }
}
