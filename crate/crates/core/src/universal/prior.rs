use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ln_factorial, ln_gamma};
use crate::strategy::tensor_len;

/// Symmetric Dirichlet prior over the order-`H` strategy simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Concentration `α > 0`; `α = 1` is the uniform density.
    pub concentration: f64,
    /// Number of strategy coordinates `k = m^H`.
    pub vertices: usize,
    /// `ln f̲`, the log of the minimum prior density over the simplex
    /// (`-∞` when the density vanishes somewhere, i.e. `α > 1`).
    pub log_density_floor: f64,
}

impl PriorSpec {
    pub fn dirichlet(concentration: f64, dim: usize, order: usize) -> Result<Self> {
        if !(concentration.is_finite() && concentration > 0.0) {
            return Err(Error::InvalidPrior(format!(
                "concentration must be positive and finite, got {concentration}"
            )));
        }
        if dim == 0 || order == 0 {
            return Err(Error::InvalidPrior("empty strategy simplex".into()));
        }
        let vertices = tensor_len(dim, order);
        Ok(Self {
            concentration,
            vertices,
            log_density_floor: log_density_floor(concentration, vertices),
        })
    }

    /// Uniform density `(m^H − 1)!`.
    pub fn uniform(dim: usize, order: usize) -> Result<Self> {
        Self::dirichlet(1.0, dim, order)
    }

    pub fn is_uniform(&self) -> bool {
        self.concentration == 1.0
    }

    pub fn density_floor(&self) -> f64 {
        self.log_density_floor.exp()
    }
}

/// Minimum of the Dirichlet(α·1) density on the `(k−1)`-simplex.
///
/// With `α < 1` the density blows up at the faces and is smallest at the
/// barycenter; with `α > 1` it vanishes on the faces.
fn log_density_floor(alpha: f64, k: usize) -> f64 {
    if k == 1 {
        return 0.0;
    }
    let kf = k as f64;
    let log_norm = ln_gamma::<f64>(kf * alpha) - kf * ln_gamma::<f64>(alpha);
    if alpha == 1.0 {
        ln_factorial((k - 1) as u64)
    } else if alpha > 1.0 {
        f64::NEG_INFINITY
    } else {
        log_norm + kf * (1.0 - alpha) * kf.ln()
    }
}
