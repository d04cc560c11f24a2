//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the portfolio machinery is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; literals in generic code go through here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Slack allowed when renormalizing weight vectors that should already sum to one.
    #[inline]
    fn renorm_tolerance() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(1e4))
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumCast
        + Debug
        + Display
        + Default
        + Sum
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// `ln Γ(x)` for positive arguments.
pub fn ln_gamma<F: Scalar>(x: F) -> F {
    F::lit(statrs::function::gamma::ln_gamma(x.as_f64()))
}

/// `ln n!`
pub fn ln_factorial<F: Scalar>(n: u64) -> F {
    // Summed directly for small n so it cancels exactly against the bound's
    // rising-factorial sum at T = 0.
    if n <= 1000 {
        (1..=n).map(|j| F::lit(j as f64).ln()).sum()
    } else {
        ln_gamma(F::lit(n as f64 + 1.0))
    }
}
