//! Log-domain accumulation helpers.

use crate::Scalar;

/// `ln Σ exp(vᵢ)`, returning `-∞` for an empty slice or all `-∞` inputs.
pub fn log_sum_exp<F: Scalar>(values: &[F]) -> F {
    let max = values.iter().copied().fold(F::neg_infinity(), F::max);
    if max == F::neg_infinity() {
        return max;
    }
    let sum: F = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `ln Σ wᵢ exp(vᵢ)` for nonnegative linear-domain weights `w`.
pub fn weighted_log_sum_exp<F: Scalar>(log_values: &[F], weights: &[F]) -> F {
    debug_assert_eq!(log_values.len(), weights.len());
    let max = log_values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > F::zero())
        .map(|(&v, _)| v)
        .fold(F::neg_infinity(), F::max);
    if max == F::neg_infinity() {
        return max;
    }
    let sum: F = log_values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > F::zero())
        .map(|(&v, &w)| w * (v - max).exp())
        .sum();
    max + sum.ln()
}

/// Normalized weights `exp(vᵢ) / Σ exp(vⱼ)`.
pub fn softmax<F: Scalar>(log_weights: &[F]) -> Vec<F> {
    let lse = log_sum_exp(log_weights);
    log_weights.iter().map(|&v| (v - lse).exp()).collect()
}
