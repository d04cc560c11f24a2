use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{pad_incomplete, MarketHistory};
use crate::strategy::{growth_tensors, tensor_len};
use crate::universal::{PriorSpec, UniversalState};
use crate::Scalar;

/// Largest strategy simplex (`m^H` vertices) handled by quadrature; beyond
/// this the node count explodes and only Monte Carlo is offered.
pub const MAX_QUADRATURE_VERTICES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel and axis, before raising for polynomial exactness.
    pub min_points: usize,
    pub max_points: usize,
    /// Panels per axis at the finest refinement.
    pub max_panels: usize,
    /// Relative agreement required between successive panel doublings.
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            min_points: 8,
            max_points: 64,
            max_panels: 16,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate<F> {
    pub log_wealth: F,
    pub points: usize,
    pub panels: usize,
    /// `|Ŵ_fine / Ŵ_coarse − 1|` at the last doubling.
    pub rel_change: F,
    pub converged: bool,
}

/// Nodes per axis that make the collapsed rule exact for `T` periods:
/// the integrand `B · ∏ ⟨B, G_t⟩` has degree `T + 1`, and the collapse adds
/// up to `k − 2` more.
pub fn quadrature_points_for(periods: usize, vertices: usize, cfg: &QuadratureConfig) -> usize {
    ((periods + vertices + 1).div_ceil(2)).clamp(cfg.min_points, cfg.max_points.max(cfg.min_points))
}

/// `ln Ŵ = ln 𝔼_uniform[W_B]` by collapsed Gauss–Legendre quadrature, doubling
/// the panel count until two successive estimates agree to `rel_tol`.
pub fn universal_wealth_quadrature<F: Scalar>(
    h: &MarketHistory<F>,
    order: usize,
    cfg: &QuadratureConfig,
) -> Result<QuadratureEstimate<F>> {
    let h = pad_incomplete(&h.with_order(order)?);
    let k = tensor_len(h.dim(), order);
    if k > MAX_QUADRATURE_VERTICES {
        return Err(Error::Unsupported(format!(
            "quadrature handles at most {MAX_QUADRATURE_VERTICES} strategy coordinates, got {k}; use Monte Carlo"
        )));
    }
    let prior = PriorSpec::uniform(h.dim(), order)?;
    let tensors = growth_tensors(&h);
    let points = quadrature_points_for(tensors.len(), k, cfg);
    let estimate = |panels: usize| -> Result<F> {
        let state = UniversalState::<F>::quadrature(prior, h.dim(), order, points, panels)?;
        let mut log_w = state.log_weights().to_vec();
        for g in &tensors {
            for (i, lw) in log_w.iter_mut().enumerate() {
                let growth: F = state.node(i).iter().zip(g).map(|(&b, &x)| b * x).sum();
                *lw = if growth > F::zero() {
                    *lw + growth.ln()
                } else {
                    F::neg_infinity()
                };
            }
        }
        Ok(crate::logspace::log_sum_exp(&log_w))
    };

    let mut panels = 1;
    let mut previous = estimate(panels)?;
    let mut rel_change = F::infinity();
    while panels * 2 <= cfg.max_panels.max(1) {
        panels *= 2;
        let next = estimate(panels)?;
        rel_change = (next - previous).exp_m1().abs();
        previous = next;
        if rel_change <= F::lit(cfg.rel_tol) {
            return Ok(QuadratureEstimate {
                log_wealth: next,
                points,
                panels,
                rel_change,
                converged: true,
            });
        }
    }
    Ok(QuadratureEstimate {
        log_wealth: previous,
        points,
        panels,
        rel_change,
        converged: false,
    })
}

/// The two-asset bilinear case: a triple integral over the tetrahedron
/// `{b₁₁ + b₁₂ + b₂₁ ≤ 1}` with density 6.
pub fn universal_wealth_quadrature_2x2<F: Scalar>(
    h: &MarketHistory<F>,
) -> Result<QuadratureEstimate<F>> {
    if h.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h.dim(),
        });
    }
    universal_wealth_quadrature(h, 2, &QuadratureConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::ReturnVector;

    fn hot_stock(t: usize) -> MarketHistory<f64> {
        let x = ReturnVector::from_f64(&[2.0, 1.0]).unwrap();
        let y = ReturnVector::from_f64(&[0.5, 1.0]).unwrap();
        MarketHistory::unlabeled(2, 2, (0..t).flat_map(|_| [x.clone(), y.clone()]).collect())
            .unwrap()
    }

    #[test]
    fn one_period_hot_stock() {
        let e = universal_wealth_quadrature_2x2(&hot_stock(1)).unwrap();
        assert!(e.converged);
        assert!((e.log_wealth.exp() - 1.125).abs() < 1e-13);
    }

    #[test]
    fn flat_history_has_unit_wealth() {
        let h = MarketHistory::unlabeled(2, 2, vec![ReturnVector::<f64>::ones(2); 8]).unwrap();
        let e = universal_wealth_quadrature_2x2(&h).unwrap();
        assert!(e.log_wealth.abs() < 1e-13);
    }

    #[test]
    fn too_many_vertices_is_unsupported() {
        let h = MarketHistory::unlabeled(3, 2, vec![ReturnVector::<f64>::ones(3); 2]).unwrap();
        assert!(matches!(
            universal_wealth_quadrature(&h, 2, &QuadratureConfig::default()),
            Err(Error::Unsupported(_))
        ));
        assert!(universal_wealth_quadrature_2x2(&h).is_err());
    }

    #[test]
    fn one_linear_horse_race() {
        // One asset pays every period: Ŵ = 1/(T+1).
        let h = MarketHistory::<f64>::kelly(2, 1, &vec![vec![0]; 9]).unwrap();
        let e = universal_wealth_quadrature(&h, 1, &QuadratureConfig::default()).unwrap();
        assert!((e.log_wealth + 10f64.ln()).abs() < 1e-12);
    }
}
