//! Scalar abstractions shared by the scoring and bound code.
//!
//! Modularity scores only need field arithmetic over integer aggregates, so
//! they are generic over [`Scalar`] and can be evaluated exactly with
//! [`Rational`]. Anything involving square roots or real powers needs
//! [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// Exact rational used by the brute-force oracle and exact scoring.
pub type Rational = num_rational::Ratio<i128>;

/// Field-like scalar that can be built from integer aggregates.
pub trait Scalar: Num + Clone + PartialOrd + Debug + FromPrimitive {
    fn from_count(x: usize) -> Self {
        Self::from_u64(x as u64).expect("count fits the scalar type")
    }

    fn from_signed(x: i64) -> Self {
        Self::from_i64(x).expect("integer fits the scalar type")
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + Debug + FromPrimitive {}

/// Floating-point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float + Copy {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the float type")
    }
}

impl<T> Real for T where T: Scalar + Float + Copy {}

/// Lossy conversion of an exact rational into `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
