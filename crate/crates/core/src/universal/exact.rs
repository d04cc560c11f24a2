//! Closed-form universal wealth on Kelly histories.
//!
//! Against a Kelly history the wealth of `B` is the monomial `∏ b^n`, so the
//! prior average is a Dirichlet integral:
//! `𝔼_α[∏ bᵢ^nᵢ] = Γ(kα) ∏ Γ(α + nᵢ) / (Γ(α)^k Γ(kα + T))`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::hindsight::KellyCounts;
use crate::scalar::ln_gamma;
use crate::universal::PriorSpec;
use crate::Scalar;

/// `ln Ŵ` for a Kelly history under a symmetric Dirichlet prior. For the
/// uniform prior this is `ln[(k−1)! ∏ n! / (T + k − 1)!]`.
pub fn universal_wealth_exact_kelly<F: Scalar>(k: &KellyCounts, prior: &PriorSpec) -> Result<F> {
    let len = k.counts().len();
    if prior.vertices != len {
        return Err(Error::DimensionMismatch {
            expected: prior.vertices,
            found: len,
        });
    }
    let alpha = F::lit(prior.concentration);
    let kf = F::from_count(len);
    let total = F::lit(k.total() as f64);
    let mut log_w = ln_gamma(kf * alpha) - ln_gamma(kf * alpha + total);
    for &n in k.counts() {
        if n > 0 {
            log_w = log_w + ln_gamma(alpha + F::lit(n as f64)) - ln_gamma(alpha);
        }
    }
    Ok(log_w)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Exact rational `Ŵ` under the uniform prior.
pub fn universal_wealth_exact_kelly_rational(k: &KellyCounts) -> BigRational {
    let vertices = k.counts().len() as u64;
    let numer = k
        .counts()
        .iter()
        .fold(factorial(vertices - 1), |acc, &n| acc * factorial(n));
    BigRational::new(numer, factorial(k.total() + vertices - 1))
}
