//! Universal multilinear portfolios: the prior-weighted, performance-weighted
//! average of all order-`H` strategies, computed exactly on Kelly histories,
//! by deterministic quadrature on small simplices, and by Monte Carlo.

mod backtest;
mod exact;
mod prior;
mod quadrature_wealth;
mod state;

pub use backtest::{
    run_universal_backtest, BacktestConfig, BacktestMeta, BacktestRecord, EstimatorChoice,
    PeriodRecord,
};
pub use exact::{universal_wealth_exact_kelly, universal_wealth_exact_kelly_rational};
pub use prior::PriorSpec;
pub use quadrature_wealth::{
    quadrature_points_for, universal_wealth_quadrature, universal_wealth_quadrature_2x2,
    QuadratureConfig, QuadratureEstimate, MAX_QUADRATURE_VERTICES,
};
pub use state::{universal_step, Estimator, UniversalState};
