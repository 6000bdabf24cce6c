// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction for criterion values, costs and genes.
//!
//! Geometry is always integer. Everything real-valued (net costs, cost
//! weights, genes, criterion totals) is generic over [`Real`], which is
//! implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable for costs, genes and criterion values.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Penalty factor applied when the finished placement violates the aspect bounds.
    const ASPECT_PENALTY: Self;

    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    fn of_int(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("i64 is representable")
    }

    /// Half of a doubled integer quantity.
    fn half(v: i64) -> Self {
        Self::of_int(v) / Self::of(2.0)
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const ASPECT_PENALTY: Self = 2.5;
}

impl Real for f64 {
    const ASPECT_PENALTY: Self = 2.5;
}

/// Total order on reals that are known not to be NaN.
pub(crate) fn cmp_real<R: Real>(a: R, b: R) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_is_exact_for_small_doubles() {
        assert_eq!(f64::half(7), 3.5);
        assert_eq!(f32::half(-3), -1.5);
    }
}
