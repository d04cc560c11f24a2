//! Best multilinear strategy in hindsight.
//!
//! The general case maximizes the concave log-wealth `Σ_t ln⟨B, G_t⟩` over the
//! `m^H`-simplex with away-step Frank–Wolfe: the linear oracle over the simplex
//! is a coordinate pick, each step gets an exact line search, and the
//! Frank–Wolfe gap bounds the remaining suboptimality. Kelly (horse-race)
//! histories have the closed form `B* = n / T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{pad_incomplete, MarketHistory};
use crate::strategy::{growth_tensors, multi_index, tensor_len, MultilinearStrategy};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HindsightConfig {
    /// Stop once the Frank–Wolfe gap falls to this value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HindsightConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindsightResult<F> {
    pub strategy: MultilinearStrategy<F>,
    /// `ln D`, the log-wealth of `strategy` on the history.
    pub log_wealth: F,
    pub iterations: usize,
    /// Frank–Wolfe gap at termination; an upper bound on `ln D* − log_wealth`.
    pub gap_certificate: F,
    pub converged: bool,
    /// Objective value at the start and after every iteration.
    pub objective_trace: Vec<F>,
}

fn objective<F: Scalar>(growth: &[F]) -> F {
    growth
        .iter()
        .map(|&g| {
            if g > F::zero() {
                g.ln()
            } else {
                F::neg_infinity()
            }
        })
        .sum()
}

/// `argmax_B Σ_t ln⟨B, G_t⟩` over order-`order` strategies, starting from the
/// uniform tensor. `h` is regrouped into periods of `order` halves and padded.
pub fn best_in_hindsight<F: Scalar>(
    h: &MarketHistory<F>,
    order: usize,
    config: &HindsightConfig,
) -> Result<HindsightResult<F>> {
    let h = pad_incomplete(&h.with_order(order)?);
    let tensors = growth_tensors(&h);
    maximize_log_wealth(&tensors, order, h.dim(), config)
}

/// Core solver over precomputed per-period growth tensors.
pub fn maximize_log_wealth<F: Scalar>(
    tensors: &[Vec<F>],
    order: usize,
    dim: usize,
    config: &HindsightConfig,
) -> Result<HindsightResult<F>> {
    let n = tensor_len(dim, order);
    let tol = F::lit(config.tol);
    let mut b = vec![F::one() / F::from_count(n); n];
    let period_growth = |b: &[F]| -> Vec<F> {
        tensors
            .iter()
            .map(|g| g.iter().zip(b).map(|(&gk, &bk)| gk * bk).sum())
            .collect()
    };
    let mut growth = period_growth(&b);
    let mut obj = objective(&growth);
    if !obj.is_finite() {
        return Err(Error::Infeasible);
    }
    let mut trace = vec![obj];
    let mut grad = vec![F::zero(); n];
    let mut gap = F::zero();
    let mut iterations = 0;
    let mut converged = false;

    while iterations <= config.max_iter {
        grad.iter_mut().for_each(|g| *g = F::zero());
        for (g_t, &w) in tensors.iter().zip(&growth) {
            for (gk, &gt) in grad.iter_mut().zip(g_t) {
                *gk = *gk + gt / w;
            }
        }
        let inner: F = grad.iter().zip(&b).map(|(&g, &w)| g * w).sum();
        let (fw_vertex, fw_value) =
            grad.iter()
                .copied()
                .enumerate()
                .fold(
                    (0, F::neg_infinity()),
                    |acc, (k, g)| if g > acc.1 { (k, g) } else { acc },
                );
        gap = (fw_value - inner).max(F::zero());
        if gap <= tol {
            converged = true;
            break;
        }
        if iterations == config.max_iter {
            break;
        }
        let (away_vertex, away_value) = grad
            .iter()
            .copied()
            .enumerate()
            .filter(|(k, _)| b[*k] > F::zero())
            .fold(
                (0, F::infinity()),
                |acc, (k, g)| if g < acc.1 { (k, g) } else { acc },
            );
        let away_gap = inner - away_value;

        // Growth moves linearly along the chosen segment: g_t + γ·δ_t.
        let (delta, gamma_max, toward) = if gap >= away_gap || b[away_vertex] >= F::one() {
            let d: Vec<F> = tensors
                .iter()
                .zip(&growth)
                .map(|(g_t, &w)| g_t[fw_vertex] - w)
                .collect();
            (d, F::one(), true)
        } else {
            let bv = b[away_vertex];
            let d: Vec<F> = tensors
                .iter()
                .zip(&growth)
                .map(|(g_t, &w)| w - g_t[away_vertex])
                .collect();
            (d, bv / (F::one() - bv), false)
        };
        let gamma = line_search(&growth, &delta, gamma_max);
        if gamma <= F::zero() {
            // Step underflowed; the gap is as small as this precision allows.
            break;
        }

        if toward {
            for (k, w) in b.iter_mut().enumerate() {
                *w = (F::one() - gamma) * *w + if k == fw_vertex { gamma } else { F::zero() };
            }
        } else {
            for w in b.iter_mut() {
                *w = (F::one() + gamma) * *w;
            }
            b[away_vertex] = if gamma >= gamma_max {
                F::zero()
            } else {
                (b[away_vertex] - gamma).max(F::zero())
            };
        }
        let total: F = b.iter().copied().sum();
        b.iter_mut().for_each(|w| *w = *w / total);

        let new_growth = period_growth(&b);
        let new_obj = objective(&new_growth);
        iterations += 1;
        if new_obj < obj {
            // Rounding can only cost a few ulps; keep the better iterate.
            debug_assert!(obj - new_obj <= F::lit(1e-9) * obj.abs().max(F::one()));
            trace.push(obj);
            break;
        }
        growth = new_growth;
        obj = new_obj;
        trace.push(obj);
    }

    Ok(HindsightResult {
        strategy: MultilinearStrategy::from_raw(order, dim, b),
        log_wealth: obj,
        iterations,
        gap_certificate: gap,
        converged: converged || gap <= tol,
        objective_trace: trace,
    })
}

/// Maximizes `Σ ln(g_t + γ δ_t)` on `[0, γ_max]` by bisection on the derivative.
fn line_search<F: Scalar>(growth: &[F], delta: &[F], gamma_max: F) -> F {
    let slope = |gamma: F| -> F {
        growth
            .iter()
            .zip(delta)
            .filter(|(_, &d)| d != F::zero())
            .map(|(&g, &d)| {
                let at = g + gamma * d;
                if at <= F::zero() {
                    F::neg_infinity()
                } else {
                    d / at
                }
            })
            .sum()
    };
    if slope(gamma_max) >= F::zero() {
        return gamma_max;
    }
    let (mut lo, mut hi) = (F::zero(), gamma_max);
    for _ in 0..200 {
        let mid = (lo + hi) / (F::one() + F::one());
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Occurrence counts of each extremal path `(i₁, …, i_H)` in a Kelly history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KellyCounts {
    dim: usize,
    order: usize,
    counts: Vec<u64>,
    total: u64,
}

impl KellyCounts {
    pub fn new(dim: usize, order: usize, counts: Vec<u64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        let len = tensor_len(dim, order);
        if counts.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: counts.len(),
            });
        }
        let total = counts.iter().sum();
        Ok(Self {
            dim,
            order,
            counts,
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Row-major counts tensor.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of periods `T`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Nonzero counts keyed by multi-index.
    pub fn nonzero(&self) -> impl Iterator<Item = (Vec<usize>, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(k, &n)| (multi_index(k, self.dim, self.order), n))
    }
}

/// Counts how often each extremal path pays in a Kelly history. Every
/// half-period must be a positive multiple of a unit basis vector.
pub fn kelly_counts<F: Scalar>(h: &MarketHistory<F>, order: usize) -> Result<KellyCounts> {
    let h = h.with_order(order)?;
    if !h.is_complete() {
        return Err(Error::Unsupported(
            "Kelly counts need complete periods; the trailing partial period has no extremal path"
                .into(),
        ));
    }
    let dim = h.dim();
    let mut counts = vec![0u64; tensor_len(dim, order)];
    for (t, period) in h.periods().enumerate() {
        let mut flat = 0;
        for (k, half) in period.iter().enumerate() {
            let i = half.basis_index().ok_or(Error::NotKellySequence {
                half: t * order + k,
            })?;
            flat = flat * dim + i;
        }
        counts[flat] += 1;
    }
    KellyCounts::new(dim, order, counts)
}

/// Closed-form hindsight optimum on a Kelly history: `B* = n / T` and
/// `ln D = Σ_{n>0} n ln(n/T)` (with `0⁰ = 1`).
pub fn kelly_hindsight<F: Scalar>(k: &KellyCounts) -> Result<HindsightResult<F>> {
    if k.total == 0 {
        return Err(Error::EmptyCounts);
    }
    let total = F::lit(k.total as f64);
    let weights: Vec<F> = k.counts.iter().map(|&n| F::lit(n as f64) / total).collect();
    let log_wealth = k
        .counts
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let n = F::lit(n as f64);
            n * (n / total).ln()
        })
        .sum();
    Ok(HindsightResult {
        strategy: MultilinearStrategy::from_raw(k.order, k.dim, weights),
        log_wealth,
        iterations: 0,
        gap_certificate: F::zero(),
        converged: true,
        objective_trace: vec![log_wealth],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::ReturnVector;

    fn hot_stock(t: usize) -> MarketHistory<f64> {
        let x = ReturnVector::from_f64(&[2.0, 1.0]).unwrap();
        let y = ReturnVector::from_f64(&[0.5, 1.0]).unwrap();
        let halves = (0..t).flat_map(|_| [x.clone(), y.clone()]).collect();
        MarketHistory::unlabeled(2, 2, halves).unwrap()
    }

    #[test]
    fn hot_stock_bilinear_optimum_is_perfect_trader() {
        for t in [1, 3, 7] {
            let r = best_in_hindsight(&hot_stock(t), 2, &HindsightConfig::default()).unwrap();
            assert!(r.converged);
            assert!((r.log_wealth - t as f64 * 2f64.ln()).abs() < 1e-12);
            for (w, e) in r.strategy.weights().iter().zip([0.0, 1.0, 0.0, 0.0]) {
                assert!((w - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hot_stock_crp_optimum_is_half_half() {
        let t = 5;
        let r = best_in_hindsight(&hot_stock(t), 1, &HindsightConfig::default()).unwrap();
        assert!((r.log_wealth - t as f64 * (9.0f64 / 8.0).ln()).abs() < 1e-12);
        assert!((r.strategy.weights()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn flat_history_returns_uniform() {
        let ones = ReturnVector::<f64>::ones(3);
        let h = MarketHistory::unlabeled(3, 2, vec![ones.clone(); 6]).unwrap();
        let r = best_in_hindsight(&h, 2, &HindsightConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.log_wealth.abs() < 1e-15);
        assert!(r
            .strategy
            .weights()
            .iter()
            .all(|&w| (w - 1.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn empty_history_has_unit_wealth() {
        let h = MarketHistory::<f64>::empty(2, 2).unwrap();
        let r = best_in_hindsight(&h, 2, &HindsightConfig::default()).unwrap();
        assert_eq!(r.log_wealth, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn iteration_budget_is_reported() {
        let h =
            MarketHistory::<f64>::kelly(3, 2, &[vec![0, 1], vec![1, 2], vec![2, 0], vec![0, 1]])
                .unwrap();
        let cfg = HindsightConfig {
            tol: 1e-14,
            max_iter: 2,
        };
        let r = best_in_hindsight(&h, 2, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.iterations <= 2);
        assert!(r.gap_certificate > 1e-14);
    }

    #[test]
    fn kelly_counting() {
        let h = MarketHistory::<f64>::kelly(2, 2, &[vec![0, 1], vec![0, 1], vec![1, 0]]).unwrap();
        let k = kelly_counts(&h, 2).unwrap();
        assert_eq!(k.counts(), &[0, 2, 1, 0]);
        assert_eq!(k.total(), 3);

        let empty = MarketHistory::<f64>::empty(2, 2).unwrap();
        let k = kelly_counts(&empty, 2).unwrap();
        assert_eq!((k.counts(), k.total()), (&[0u64, 0, 0, 0][..], 0));

        assert_eq!(
            kelly_counts(&hot_stock(2), 2),
            Err(Error::NotKellySequence { half: 0 })
        );
    }

    #[test]
    fn kelly_counting_accepts_scaled_basis_vectors() {
        let h = MarketHistory::unlabeled(
            2,
            2,
            vec![
                ReturnVector::<f64>::from_f64(&[3.0, 0.0]).unwrap(),
                ReturnVector::from_f64(&[0.0, 0.2]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(kelly_counts(&h, 2).unwrap().counts(), &[0, 1, 0, 0]);
    }

    #[test]
    fn kelly_closed_form_examples() {
        let k = KellyCounts::new(2, 2, vec![0, 2, 1, 0]).unwrap();
        let r = kelly_hindsight::<f64>(&k).unwrap();
        assert!((r.log_wealth - (4.0f64 / 27.0).ln()).abs() < 1e-14);
        assert!((r.strategy.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.strategy.weights()[2] - 1.0 / 3.0).abs() < 1e-15);

        let k = KellyCounts::new(2, 2, vec![5, 0, 0, 0]).unwrap();
        let r = kelly_hindsight::<f64>(&k).unwrap();
        assert_eq!(r.log_wealth, 0.0);
        assert_eq!(r.strategy.weights(), &[1.0, 0.0, 0.0, 0.0]);

        // n_ij = T/m² with m = 2, T = 8: D = m^(−2T)
        let k = KellyCounts::new(2, 2, vec![2, 2, 2, 2]).unwrap();
        let r = kelly_hindsight::<f64>(&k).unwrap();
        assert!((r.log_wealth - (-16.0 * 2f64.ln())).abs() < 1e-12);

        let k = KellyCounts::new(2, 2, vec![0; 4]).unwrap();
        assert_eq!(kelly_hindsight::<f64>(&k), Err(Error::EmptyCounts));
    }

    #[test]
    fn frank_wolfe_matches_kelly_closed_form() {
        let periods = vec![vec![0, 1], vec![0, 1], vec![1, 0], vec![2, 2], vec![0, 1]];
        let h = MarketHistory::<f64>::kelly(3, 2, &periods).unwrap();
        let fw = best_in_hindsight(&h, 2, &HindsightConfig::default()).unwrap();
        let exact = kelly_hindsight::<f64>(&kelly_counts(&h, 2).unwrap()).unwrap();
        assert!(fw.converged, "gap {}", fw.gap_certificate);
        assert!((fw.log_wealth - exact.log_wealth).abs() < 1e-8);
        assert!(fw.objective_trace.windows(2).all(|w| w[1] >= w[0]));
    }
}
