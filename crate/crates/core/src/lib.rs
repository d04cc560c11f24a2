//! Universal H-linear portfolio selection.
//!
//! An order-`H` (H-linear) trading strategy splits each investment period into
//! `H` sub-periods and grows wealth by a multilinear form in the sub-period
//! gross-return vectors. `H = 1` recovers constant-rebalanced portfolios,
//! `H = 2` bilinear strategies. This crate evaluates such strategies, finds the
//! best one in hindsight, forms the universal (prior-averaged,
//! performance-weighted) portfolio, and measures its competitive ratio
//! against the uniform lower bound.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix `f64`. Exact rational values are provided where closed forms are
//! rational.

pub mod analysis;
pub mod error;
pub mod hindsight;
pub mod hotstock;
pub mod logspace;
pub mod market_data;
pub mod quadrature;
pub mod scalar;
pub mod strategy;
pub mod universal;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use analysis::{
    competitive_ratio, excess_growth, excess_growth_asymptote, excess_growth_bound,
    log_ratio_lower_bound, ratio_lower_bound, ratio_report, RatioReport,
};
pub use hindsight::{
    best_in_hindsight, kelly_counts, kelly_hindsight, HindsightConfig, HindsightResult, KellyCounts,
};
pub use market_data::{normalize_half, pad_incomplete, parse_history, MarketHistory, ReturnVector};
pub use strategy::{
    embed_buy_and_hold, embed_crp, embed_product, MultilinearStrategy, PortfolioVector,
    WealthOutcome,
};
pub use universal::{
    run_universal_backtest, universal_step, universal_wealth_exact_kelly,
    universal_wealth_exact_kelly_rational, universal_wealth_quadrature,
    universal_wealth_quadrature_2x2, BacktestConfig, BacktestRecord, Estimator, EstimatorChoice,
    PriorSpec, QuadratureConfig, UniversalState,
};

pub type Returns = ReturnVector<f64>;
pub type History = MarketHistory<f64>;
pub type Strategy = MultilinearStrategy<f64>;
pub type Portfolio = PortfolioVector<f64>;
pub type Hindsight = HindsightResult<f64>;
pub type Universal = UniversalState<f64>;
pub type Backtest = BacktestRecord<f64>;
pub type Ratio = RatioReport<f64>;
