//! The performance-weighted average of strategies, carried as a weighted
//! point cloud over the strategy simplex.
//!
//! Monte Carlo draws `n` strategies from the Dirichlet prior once, each with
//! prior mass `1/n`; the quadrature variant uses the nodes and weights of a
//! [`SimplexRule`]. Either way each node's log-weight is its log prior mass
//! plus its log-wealth so far, the universal strategy is the weight-averaged
//! node, and the universal wealth is the weighted sum of node wealths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::ReturnVector;
use crate::quadrature::SimplexRule;
use crate::strategy::{growth_tensor, MultilinearStrategy};
use crate::universal::PriorSpec;
use crate::Scalar;

/// Fixed chunking keeps parallel reductions bit-reproducible across thread counts.
const CHUNK: usize = 4096;

/// How the prior average is represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    MonteCarlo { samples: usize, seed: u64 },
    Quadrature { points: usize, panels: usize },
}

impl Estimator {
    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Estimator::MonteCarlo { .. })
    }
}

#[derive(Debug, Clone)]
pub struct UniversalState<F> {
    prior: PriorSpec,
    estimator: Estimator,
    order: usize,
    dim: usize,
    /// Row-major `n × m^H` node strategies.
    nodes: Vec<F>,
    /// Log prior mass plus accumulated log-wealth, per node.
    log_weights: Vec<F>,
    /// `Σ_t ln(universal return_t)`, accumulated one period at a time.
    log_universal_wealth: F,
    current: MultilinearStrategy<F>,
    periods: usize,
}

impl<F: Scalar> UniversalState<F> {
    /// Draws `samples` strategies from Dirichlet(α·1) with a seeded ChaCha8 stream.
    pub fn monte_carlo(
        prior: PriorSpec,
        dim: usize,
        order: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        check_prior(&prior, dim, order)?;
        if samples == 0 {
            return Err(Error::InvalidPrior("need at least one sample".into()));
        }
        let k = prior.vertices;
        let gamma =
            Gamma::new(prior.concentration, 1.0).map_err(|e| Error::InvalidPrior(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(samples * k);
        let mut draw = vec![0.0f64; k];
        for _ in 0..samples {
            loop {
                draw.iter_mut().for_each(|g| *g = gamma.sample(&mut rng));
                let total: f64 = draw.iter().sum();
                if total > 0.0 && total.is_finite() {
                    nodes.extend(draw.iter().map(|&g| F::lit(g / total)));
                    break;
                }
            }
        }
        let log_mass = -F::from_count(samples).ln();
        Ok(Self::from_cloud(
            prior,
            Estimator::MonteCarlo { samples, seed },
            dim,
            order,
            nodes,
            vec![log_mass; samples],
        ))
    }

    /// Deterministic cloud from the collapsed Gauss–Legendre simplex rule.
    /// Requires the uniform prior.
    pub fn quadrature(
        prior: PriorSpec,
        dim: usize,
        order: usize,
        points: usize,
        panels: usize,
    ) -> Result<Self> {
        check_prior(&prior, dim, order)?;
        if !prior.is_uniform() {
            return Err(Error::Unsupported(
                "quadrature is only available for the uniform prior (α = 1)".into(),
            ));
        }
        let rule = SimplexRule::<F>::collapsed(prior.vertices, points, panels);
        let log_weights = rule.weights().iter().map(|w| w.ln()).collect();
        Ok(Self::from_cloud(
            prior,
            Estimator::Quadrature { points, panels },
            dim,
            order,
            rule.points().to_vec(),
            log_weights,
        ))
    }

    fn from_cloud(
        prior: PriorSpec,
        estimator: Estimator,
        dim: usize,
        order: usize,
        nodes: Vec<F>,
        log_weights: Vec<F>,
    ) -> Self {
        let mut state = Self {
            prior,
            estimator,
            order,
            dim,
            nodes,
            log_weights,
            log_universal_wealth: F::zero(),
            current: MultilinearStrategy::uniform(order, dim),
            periods: 0,
        };
        state.current = state.weighted_mean();
        state
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    /// Complete periods consumed so far.
    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn log_weights(&self) -> &[F] {
        &self.log_weights
    }

    pub fn node(&self, i: usize) -> &[F] {
        let k = self.prior.vertices;
        &self.nodes[i * k..(i + 1) * k]
    }

    /// Telescoped universal log-wealth `Σ_t ln⟨B̂_{t−1}, G_t⟩`.
    pub fn log_universal_wealth(&self) -> F {
        self.log_universal_wealth
    }

    /// The universal strategy to hold during the next period.
    pub fn current_strategy(&self) -> &MultilinearStrategy<F> {
        &self.current
    }

    fn max_log_weight(&self) -> F {
        self.log_weights
            .par_chunks(CHUNK)
            .map(|c| c.iter().copied().fold(F::neg_infinity(), F::max))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(F::neg_infinity(), F::max)
    }

    /// Normalized node weights (they sum to one).
    pub fn normalized_weights(&self) -> Vec<F> {
        let max = self.max_log_weight();
        let mut w: Vec<F> = self
            .log_weights
            .par_iter()
            .map(|&l| (l - max).exp())
            .collect();
        let total: F = w
            .par_chunks(CHUNK)
            .map(|c| c.iter().copied().sum::<F>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        w.par_iter_mut().for_each(|x| *x = *x / total);
        w
    }

    /// `ln Σ_i (prior mass_i · W_i)`, the direct average of node wealths.
    pub fn log_mean_wealth(&self) -> F {
        let max = self.max_log_weight();
        if max == F::neg_infinity() {
            return max;
        }
        let total: F = self
            .log_weights
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&l| (l - max).exp()).sum::<F>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        max + total.ln()
    }

    fn weighted_mean(&self) -> MultilinearStrategy<F> {
        let w = self.normalized_weights();
        let mean = self.weighted_sum(&w, |b, _| b);
        MultilinearStrategy::new(self.order, self.dim, mean)
            .unwrap_or_else(|_| MultilinearStrategy::uniform(self.order, self.dim))
    }

    /// `Σ_i w_i f(b_i, j)` for every coordinate `j`, reduced in fixed chunk order.
    fn weighted_sum(&self, w: &[F], f: impl Fn(F, usize) -> F + Sync) -> Vec<F> {
        let k = self.prior.vertices;
        self.nodes
            .par_chunks(CHUNK * k)
            .zip(w.par_chunks(CHUNK))
            .map(|(nodes, ws)| {
                let mut acc = vec![F::zero(); k];
                for (b, &wi) in nodes.chunks_exact(k).zip(ws) {
                    for (j, a) in acc.iter_mut().enumerate() {
                        *a = *a + wi * f(b[j], j);
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(vec![F::zero(); k], |mut acc, part| {
                acc.iter_mut().zip(part).for_each(|(a, p)| *a = *a + p);
                acc
            })
    }

    /// Advances one complete period: reweights every node by its growth and
    /// recomputes the universal strategy. Returns the universal period return.
    pub fn step(&mut self, halves: &[ReturnVector<F>]) -> Result<F> {
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
        let k = self.prior.vertices;
        let g = growth_tensor(halves);
        let growth: Vec<F> = self
            .nodes
            .par_chunks(k)
            .map(|b| b.iter().zip(&g).map(|(&x, &y)| x * y).sum())
            .collect();
        let w = self.normalized_weights();
        let period_return: F = growth
            .par_chunks(CHUNK)
            .zip(w.par_chunks(CHUNK))
            .map(|(gs, ws)| gs.iter().zip(ws).map(|(&a, &b)| a * b).sum::<F>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        if period_return.partial_cmp(&F::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::UniversalRuin {
                period: self.periods,
            });
        }
        self.log_weights
            .par_iter_mut()
            .zip(&growth)
            .for_each(|(l, &gi)| {
                *l = if gi > F::zero() {
                    *l + gi.ln()
                } else {
                    F::neg_infinity()
                }
            });
        self.log_universal_wealth = self.log_universal_wealth + period_return.ln();
        self.periods += 1;
        self.current = self.weighted_mean();
        Ok(period_return)
    }

    /// Kish effective sample size `1 / Σ wᵢ²` of the normalized weights.
    pub fn effective_sample_size(&self) -> F {
        let w = self.normalized_weights();
        let sq: F = w
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&x| x * x).sum::<F>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        F::one() / sq
    }

    /// Delta-method standard error of each self-normalized entry of `B̂`:
    /// `sqrt(Σ wᵢ² (bᵢ − b̂)²)`. Only meaningful for Monte Carlo clouds.
    pub fn strategy_std_error(&self) -> Vec<F> {
        let w = self.normalized_weights();
        let mean = self.current.weights().to_vec();
        let k = self.prior.vertices;
        let w2: Vec<F> = w.iter().map(|&x| x * x).collect();
        self.weighted_sum(&w2, |b, j| {
            let d = b - mean[j];
            d * d
        })
        .into_iter()
        .take(k)
        .map(|v| v.sqrt())
        .collect()
    }

    /// `b̂_a − b̂_b` and its delta-method standard error, for comparing two entries.
    pub fn entry_contrast(&self, a: usize, b: usize) -> (F, F) {
        let w = self.normalized_weights();
        let diff = self.current.weights()[a] - self.current.weights()[b];
        let k = self.prior.vertices;
        let var: F = self
            .nodes
            .chunks_exact(k)
            .zip(&w)
            .map(|(node, &wi)| {
                let d = node[a] - node[b] - diff;
                wi * wi * d * d
            })
            .sum();
        (diff, var.sqrt())
    }

    /// Standard error of `ln Ŵ` for an equal-mass Monte Carlo cloud:
    /// `sqrt(n/(n−1) · Σ (wᵢ − 1/n)²)` with normalized weights `w`.
    pub fn log_wealth_std_error(&self) -> Option<F> {
        if !self.estimator.is_monte_carlo() || self.len() < 2 {
            return None;
        }
        let n = F::from_count(self.len());
        let inv_n = F::one() / n;
        let w = self.normalized_weights();
        let ss: F = w
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&x| (x - inv_n) * (x - inv_n)).sum::<F>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        Some((ss * n / (n - F::one())).sqrt())
    }

    /// Accumulated log-wealth minus the log of the direct node-wealth average.
    /// Zero up to rounding: the per-period ratios telescope.
    pub fn telescoping_residual(&self) -> F {
        self.log_universal_wealth - self.log_mean_wealth()
    }
}

/// Consuming form of [`UniversalState::step`].
pub fn universal_step<F: Scalar>(
    mut state: UniversalState<F>,
    period_halves: &[ReturnVector<F>],
) -> Result<UniversalState<F>> {
    state.step(period_halves)?;
    Ok(state)
}

fn check_prior(prior: &PriorSpec, dim: usize, order: usize) -> Result<()> {
    let expected = crate::strategy::tensor_len(dim, order);
    if prior.vertices != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: prior.vertices,
        });
    }
    Ok(())
}
