//! H-linear trading strategies: dense order-`H` weight tensors on the
//! `m^H`-simplex, their per-period growth, and the classical strategies
//! (constant-rebalanced, buy-and-hold) embedded as special cases.
//!
//! Tensors are stored row-major: the multi-index `(i₁, …, i_H)` maps to
//! `Σ_h i_h · m^(H-1-h)`, so the first sub-period's asset varies slowest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{pad_incomplete, MarketHistory, ReturnVector};
use crate::Scalar;

/// Number of entries `m^H` of an order-`H` tensor over `m` assets.
pub fn tensor_len(dim: usize, order: usize) -> usize {
    dim.pow(order as u32)
}

/// Flat position of a multi-index.
pub fn flat_index(index: &[usize], dim: usize) -> usize {
    index.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Multi-index of a flat position.
pub fn multi_index(mut flat: usize, dim: usize, order: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
    idx
}

/// Outer product `x¹ ⊗ … ⊗ x^H` of one period's return vectors; the growth of
/// strategy `B` in that period is `⟨B, G⟩`.
pub fn growth_tensor<F: Scalar>(halves: &[ReturnVector<F>]) -> Vec<F> {
    let mut out = vec![F::one()];
    for h in halves {
        let v = h.as_slice();
        let mut next = Vec::with_capacity(out.len() * v.len());
        for &a in &out {
            next.extend(v.iter().map(|&b| a * b));
        }
        out = next;
    }
    out
}

/// Growth tensors for every complete period of `h`.
pub fn growth_tensors<F: Scalar>(h: &MarketHistory<F>) -> Vec<Vec<F>> {
    h.periods().map(growth_tensor).collect()
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// A portfolio on the unit simplex `Δ_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PortfolioVector<F> {
    weights: Vec<F>,
}

impl<F: Scalar> PortfolioVector<F> {
    pub fn new(weights: Vec<F>) -> Result<Self> {
        Ok(Self {
            weights: normalize_weights(weights)?,
        })
    }

    pub fn from_f64(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| F::lit(w)).collect())
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            weights: vec![F::one() / F::from_count(dim); dim],
        }
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        let mut weights = vec![F::zero(); dim];
        weights[index] = F::one();
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.weights
    }

    /// Single-period growth `c'x`.
    pub fn growth(&self, x: &ReturnVector<F>) -> F {
        dot(&self.weights, x.as_slice())
    }
}

/// Validates nonnegativity and renormalizes a weight vector whose sum is within
/// [`Scalar::renorm_tolerance`] of one.
fn normalize_weights<F: Scalar>(weights: Vec<F>) -> Result<Vec<F>> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < F::zero()) {
        return Err(Error::InvalidWeights(format!(
            "weights must be finite and nonnegative, found {w}"
        )));
    }
    let total: F = weights.iter().copied().sum();
    if (total - F::one()).abs() > F::renorm_tolerance() {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Growth of a strategy over one period, with ruin tracked separately from the log value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WealthOutcome<F> {
    /// `Σ_t ln(growth_t)`; `-∞` when ruined.
    pub log_wealth: F,
    /// First (0-based) period whose growth was exactly zero.
    pub ruined_at: Option<usize>,
}

impl<F: Scalar> WealthOutcome<F> {
    pub fn is_ruined(&self) -> bool {
        self.ruined_at.is_some()
    }

    pub fn wealth(&self) -> F {
        self.log_wealth.exp()
    }
}

/// An order-`H` multilinear trading strategy over `m` assets.
///
/// `H = 1` is a constant-rebalanced portfolio, `H = 2` a bilinear matrix `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "StrategyRepr<F>",
    bound(deserialize = "F: Scalar", serialize = "F: Scalar")
)]
pub struct MultilinearStrategy<F> {
    order: usize,
    dim: usize,
    weights: Vec<F>,
}

#[derive(Deserialize)]
struct StrategyRepr<F> {
    order: usize,
    dim: usize,
    weights: Vec<F>,
}

impl<F: Scalar> TryFrom<StrategyRepr<F>> for MultilinearStrategy<F> {
    type Error = Error;

    fn try_from(r: StrategyRepr<F>) -> Result<Self> {
        Self::new(r.order, r.dim, r.weights)
    }
}

impl<F: Scalar> MultilinearStrategy<F> {
    /// Builds a strategy from row-major weights, renormalizing small drift in the sum.
    pub fn new(order: usize, dim: usize, weights: Vec<F>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if dim == 0 {
            return Err(Error::InvalidWeights("dimension must be positive".into()));
        }
        let len = tensor_len(dim, order);
        if weights.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: weights.len(),
            });
        }
        Ok(Self {
            order,
            dim,
            weights: normalize_weights(weights)?,
        })
    }

    pub fn from_f64(order: usize, dim: usize, weights: &[f64]) -> Result<Self> {
        Self::new(order, dim, weights.iter().map(|&w| F::lit(w)).collect())
    }

    /// Caller guarantees the weights already lie on the simplex.
    pub(crate) fn from_raw(order: usize, dim: usize, weights: Vec<F>) -> Self {
        debug_assert_eq!(weights.len(), tensor_len(dim, order));
        Self {
            order,
            dim,
            weights,
        }
    }

    /// The barycenter of the strategy simplex.
    pub fn uniform(order: usize, dim: usize) -> Self {
        let len = tensor_len(dim, order);
        Self::from_raw(order, dim, vec![F::one() / F::from_count(len); len])
    }

    /// The extremal strategy that rolls all wealth through assets `index[0], …, index[H-1]`.
    pub fn extremal(dim: usize, index: &[usize]) -> Self {
        let order = index.len();
        let mut weights = vec![F::zero(); tensor_len(dim, order)];
        weights[flat_index(index, dim)] = F::one();
        Self::from_raw(order, dim, weights)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn get(&self, index: &[usize]) -> F {
        self.weights[flat_index(index, self.dim)]
    }

    fn check_halves(&self, halves: &[ReturnVector<F>]) -> Result<()> {
        if halves.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: halves.len(),
            });
        }
        if let Some(h) = halves.iter().find(|h| h.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.dim(),
            });
        }
        Ok(())
    }

    /// Capital growth over one period: `Σ B(i₁..i_H) ∏_h x^h_{i_h}`.
    pub fn period_growth(&self, halves: &[ReturnVector<F>]) -> Result<F> {
        self.check_halves(halves)?;
        Ok(self.growth_against(&growth_tensor(halves)))
    }

    /// `⟨B, G⟩` for a precomputed growth tensor.
    pub fn growth_against(&self, growth: &[F]) -> F {
        dot(&self.weights, growth)
    }

    /// Log final wealth over every period of `h`. A trailing incomplete period
    /// is completed with all-ones halves first. An empty history has wealth 1.
    pub fn wealth(&self, h: &MarketHistory<F>) -> Result<WealthOutcome<F>> {
        if h.order() != self.order {
            return self.wealth(&h.with_order(self.order)?);
        }
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.dim(),
            });
        }
        let padded;
        let h = if h.is_complete() {
            h
        } else {
            padded = pad_incomplete(h);
            &padded
        };
        let mut log_wealth = F::zero();
        for (t, period) in h.periods().enumerate() {
            let g = self.period_growth(period)?;
            if g <= F::zero() {
                return Ok(WealthOutcome {
                    log_wealth: F::neg_infinity(),
                    ruined_at: Some(t),
                });
            }
            log_wealth = log_wealth + g.ln();
        }
        Ok(WealthOutcome {
            log_wealth,
            ruined_at: None,
        })
    }

    /// Nonzero entries with their multi-indices; `B = Σ w · e_{i₁} ⊗ … ⊗ e_{i_H}`.
    pub fn extremal_decomposition(&self) -> Vec<(Vec<usize>, F)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > F::zero())
            .map(|(k, &w)| (multi_index(k, self.dim, self.order), w))
            .collect()
    }

    /// Reassembles a strategy from an extremal decomposition.
    pub fn from_extremal(order: usize, dim: usize, parts: &[(Vec<usize>, F)]) -> Result<Self> {
        let mut weights = vec![F::zero(); tensor_len(dim, order)];
        for (idx, w) in parts {
            if idx.len() != order || idx.iter().any(|&i| i >= dim) {
                return Err(Error::InvalidWeights(format!("bad multi-index {idx:?}")));
            }
            weights[flat_index(idx, dim)] = weights[flat_index(idx, dim)] + *w;
        }
        Self::new(order, dim, weights)
    }

    /// `Σ λₖ Bₖ` for convex weights `λ`.
    pub fn convex_combination(parts: &[(F, &Self)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidWeights("empty combination".into()))?
            .1;
        let mut weights = vec![F::zero(); first.weights.len()];
        for (lambda, s) in parts {
            if s.order != first.order || s.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    expected: first.weights.len(),
                    found: s.weights.len(),
                });
            }
            for (w, &b) in weights.iter_mut().zip(&s.weights) {
                *w = *w + *lambda * b;
            }
        }
        Self::new(first.order, first.dim, weights)
    }

    /// Period-one and period-two portfolios `(p, q(x))` that replicate a bilinear
    /// payoff: `p = B1`, `q = B'x / x'B1`. Only defined for `H = 2`.
    pub fn replication_portfolios(
        &self,
        x: &ReturnVector<F>,
    ) -> Result<(PortfolioVector<F>, PortfolioVector<F>)> {
        if self.order != 2 {
            return Err(Error::Unsupported(format!(
                "replication portfolios are only implemented for order 2, got {}",
                self.order
            )));
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let m = self.dim;
        let xs = x.as_slice();
        let p: Vec<F> = (0..m)
            .map(|i| self.weights[i * m..(i + 1) * m].iter().copied().sum())
            .collect();
        let first_half = dot(&p, xs);
        if first_half <= F::zero() {
            return Err(Error::FirstHalfRuin);
        }
        let q: Vec<F> = (0..m)
            .map(|j| (0..m).map(|i| self.weights[i * m + j] * xs[i]).sum::<F>() / first_half)
            .collect();
        Ok((
            PortfolioVector { weights: p },
            PortfolioVector { weights: q },
        ))
    }
}

/// Product strategy `c¹ ⊗ … ⊗ c^H`: hold portfolio `c^h` throughout sub-period `h`.
pub fn embed_product<F: Scalar>(
    portfolios: &[PortfolioVector<F>],
) -> Result<MultilinearStrategy<F>> {
    let dim = portfolios.first().ok_or(Error::InvalidOrder)?.dim();
    if let Some(p) = portfolios.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    let mut weights = vec![F::one()];
    for c in portfolios {
        let mut next = Vec::with_capacity(weights.len() * dim);
        for &a in &weights {
            next.extend(c.as_slice().iter().map(|&b| a * b));
        }
        weights = next;
    }
    Ok(MultilinearStrategy::from_raw(
        portfolios.len(),
        dim,
        weights,
    ))
}

/// A constant-rebalanced portfolio as an order-`H` strategy: `B(i₁..i_H) = ∏ c_{i_h}`.
pub fn embed_crp<F: Scalar>(
    c: &PortfolioVector<F>,
    order: usize,
) -> Result<MultilinearStrategy<F>> {
    if order == 0 {
        return Err(Error::InvalidOrder);
    }
    embed_product(&vec![c.clone(); order])
}

/// Two-period buy-and-hold of `c` as the bilinear strategy `diag(c)`.
pub fn embed_buy_and_hold<F: Scalar>(c: &PortfolioVector<F>) -> MultilinearStrategy<F> {
    let m = c.dim();
    let mut weights = vec![F::zero(); m * m];
    for (i, &ci) in c.as_slice().iter().enumerate() {
        weights[i * m + i] = ci;
    }
    MultilinearStrategy::from_raw(2, m, weights)
}
