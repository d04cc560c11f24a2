//! Period-by-period run of the universal portfolio against a history, with
//! the hindsight benchmark, competitive ratio and bound recorded each period.

use serde::{Deserialize, Serialize};

use crate::analysis::{log_ratio_lower_bound, ratio_report};
use crate::error::Result;
use crate::hindsight::{maximize_log_wealth, HindsightConfig};
use crate::market_data::{pad_incomplete, MarketHistory};
use crate::strategy::{growth_tensors, multi_index, tensor_len};
use crate::universal::quadrature_wealth::universal_wealth_quadrature;
use crate::universal::{Estimator, PriorSpec, QuadratureConfig, UniversalState};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EstimatorChoice {
    MonteCarlo { samples: usize, seed: u64 },
    Quadrature(QuadratureConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub order: usize,
    pub prior_alpha: f64,
    pub estimator: EstimatorChoice,
    pub hindsight: HindsightConfig,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            order: 2,
            prior_alpha: 1.0,
            estimator: EstimatorChoice::MonteCarlo {
                samples: 100_000,
                seed: 42,
            },
            hindsight: HindsightConfig::default(),
        }
    }
}

/// State after `t` complete periods. Row `t = 0` is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord<F> {
    pub t: usize,
    pub universal_log_wealth: F,
    /// Standard error of `universal_log_wealth` (Monte Carlo only).
    pub universal_log_wealth_se: Option<F>,
    /// Growth of the universal portfolio during period `t` (1 for `t = 0`).
    pub period_return: F,
    pub hindsight_log_wealth: F,
    pub hindsight_gap: F,
    pub hindsight_converged: bool,
    pub competitive_ratio_log: F,
    pub bound_log: F,
    pub bound_satisfied: bool,
    /// `B̂` after observing `t` periods, row-major; held during period `t + 1`.
    pub strategy_tensor: Vec<F>,
    pub strategy_std_error: Option<Vec<F>>,
    pub ess: Option<F>,
    /// Telescoped log-wealth minus log of the direct average of node wealths.
    pub telescoping_residual: F,
    pub telescoping_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestMeta {
    pub m: usize,
    #[serde(rename = "H")]
    pub order: usize,
    pub prior_alpha: f64,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub estimator: Estimator,
    pub assets: Vec<String>,
    /// Whether a trailing partial period was completed with all-ones halves.
    pub padded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRecord<F> {
    pub periods: Vec<PeriodRecord<F>>,
    pub meta: BacktestMeta,
}

impl<F: Scalar> BacktestRecord<F> {
    pub fn last(&self) -> &PeriodRecord<F> {
        self.periods.last().expect("row t = 0 is always present")
    }

    pub fn telescoping_ok(&self) -> bool {
        self.periods.iter().all(|p| p.telescoping_ok)
    }

    pub fn hindsight_converged(&self) -> bool {
        self.periods.iter().all(|p| p.hindsight_converged)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Flat one-row-per-period mirror of the JSON record.
    pub fn to_csv(&self) -> String {
        let m = self.meta.m;
        let k = tensor_len(m, self.meta.order);
        let labels: Vec<String> = (0..k)
            .map(|flat| {
                let idx: Vec<String> = multi_index(flat, m, self.meta.order)
                    .iter()
                    .map(|i| (i + 1).to_string())
                    .collect();
                if m > 9 {
                    format!("b_{}", idx.join("_"))
                } else {
                    format!("b{}", idx.concat())
                }
            })
            .collect();
        let mut out = String::from(
            "t,universal_log_wealth,universal_log_wealth_se,period_return,hindsight_log_wealth,hindsight_gap,competitive_ratio_log,bound_log,bound_satisfied,ess,telescoping_residual",
        );
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        let opt = |v: Option<F>| v.map_or(String::new(), |x| format!("{x:?}"));
        for p in &self.periods {
            out.push_str(&format!(
                "{},{:?},{},{:?},{:?},{:?},{:?},{:?},{},{},{:?}",
                p.t,
                p.universal_log_wealth,
                opt(p.universal_log_wealth_se),
                p.period_return,
                p.hindsight_log_wealth,
                p.hindsight_gap,
                p.competitive_ratio_log,
                p.bound_log,
                p.bound_satisfied,
                opt(p.ess),
                p.telescoping_residual,
            ));
            for w in &p.strategy_tensor {
                out.push_str(&format!(",{w:?}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the universal order-`H` portfolio over `h` (padding a trailing
/// partial period) and records wealth, hindsight benchmark and bounds.
pub fn run_universal_backtest<F: Scalar>(
    h: &MarketHistory<F>,
    cfg: &BacktestConfig,
) -> Result<BacktestRecord<F>> {
    let regrouped = h.with_order(cfg.order)?;
    let padded = !regrouped.is_complete();
    let h = pad_incomplete(&regrouped);
    let (dim, order) = (h.dim(), cfg.order);
    let prior = PriorSpec::dirichlet(cfg.prior_alpha, dim, order)?;

    let mut state = match cfg.estimator {
        EstimatorChoice::MonteCarlo { samples, seed } => {
            UniversalState::monte_carlo(prior, dim, order, samples, seed)?
        }
        EstimatorChoice::Quadrature(q) => {
            // Pick the refinement on the full history; exactness carries over to prefixes.
            let est = universal_wealth_quadrature(&h, order, &q)?;
            UniversalState::quadrature(prior, dim, order, est.points, est.panels)?
        }
    };
    let mc = state.estimator().is_monte_carlo();
    let tensors = growth_tensors(&h);

    let mut periods = Vec::with_capacity(tensors.len() + 1);
    let mut record = |state: &UniversalState<F>, t: usize, period_return: F| -> Result<()> {
        let hs = maximize_log_wealth(&tensors[..t], order, dim, &cfg.hindsight)?;
        let se = state.log_wealth_std_error();
        let log_bound =
            log_ratio_lower_bound(dim, order, t as u64, F::lit(prior.log_density_floor));
        let report = ratio_report(
            state.log_universal_wealth(),
            se,
            hs.log_wealth,
            t as u64,
            log_bound,
        )?;
        let residual = state.telescoping_residual();
        let scale = F::one().max(state.log_universal_wealth().abs());
        let allowed = se.map_or(F::zero(), |s| F::lit(3.0) * s) + F::lit(1e-9) * scale;
        periods.push(PeriodRecord {
            t,
            universal_log_wealth: state.log_universal_wealth(),
            universal_log_wealth_se: se,
            period_return,
            hindsight_log_wealth: hs.log_wealth,
            hindsight_gap: hs.gap_certificate,
            hindsight_converged: hs.converged,
            competitive_ratio_log: report.log_ratio,
            bound_log: log_bound,
            bound_satisfied: report.bound_satisfied,
            strategy_tensor: state.current_strategy().weights().to_vec(),
            strategy_std_error: mc.then(|| state.strategy_std_error()),
            ess: mc.then(|| state.effective_sample_size()),
            telescoping_residual: residual,
            telescoping_ok: residual.abs() <= allowed,
        });
        Ok(())
    };

    record(&state, 0, F::one())?;
    for (t, period) in h.periods().enumerate() {
        let r = state.step(period)?;
        record(&state, t + 1, r)?;
    }

    let (n_samples, seed) = match cfg.estimator {
        EstimatorChoice::MonteCarlo { samples, seed } => (Some(samples), Some(seed)),
        EstimatorChoice::Quadrature(_) => (None, None),
    };
    Ok(BacktestRecord {
        periods,
        meta: BacktestMeta {
            m: dim,
            order,
            prior_alpha: cfg.prior_alpha,
            n_samples,
            seed,
            estimator: state.estimator(),
            assets: h.assets().to_vec(),
            padded,
        },
    })
}
