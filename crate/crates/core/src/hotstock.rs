//! Closed-form oracle for the two-asset "hot stock" market: asset 1 doubles in
//! the first half of every period and halves in the second; asset 2 is cash.
//! Per period `x = (2, 1)`, `y = (1/2, 1)`, and a bilinear strategy grows by
//! `1 + b₁₂ − b₂₁/2`.
//!
//! The closed forms here are evaluated in `f64` and in a form that stays
//! finite for very long horizons (`t` up to at least `10⁶`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::market_data::{MarketHistory, ReturnVector};
use crate::quadrature::gauss_legendre;
use crate::universal::{PriorSpec, UniversalState};
use crate::Scalar;

/// `t` periods of `x = (2, 1)`, `y = (1/2, 1)` over assets `stock, cash`.
pub fn hotstock_history<F: Scalar>(t: usize) -> MarketHistory<F> {
    let x = ReturnVector::from_f64(&[2.0, 1.0]).expect("valid");
    let y = ReturnVector::from_f64(&[0.5, 1.0]).expect("valid");
    let halves = (0..t).flat_map(|_| [x.clone(), y.clone()]).collect();
    MarketHistory::new(vec!["stock".into(), "cash".into()], 2, halves).expect("valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotStockReport {
    pub t: usize,
    /// `ln Ŵ` of the universal bilinear portfolio (uniform prior).
    pub log_universal_wealth: f64,
    /// `ln D = t ln 2`: perfect trading, all in the stock then all in cash.
    pub log_hindsight_wealth: f64,
    /// `ln S* = t ln(9/8)`: the best constant-rebalanced portfolio `(1/2, 1/2)`.
    pub log_crp_hindsight_wealth: f64,
    pub log_ratio: f64,
    pub universal_wealth: f64,
    pub hindsight_wealth: f64,
    pub crp_hindsight_wealth: f64,
    pub ratio: f64,
    /// `[b̂₁₁, b̂₁₂, b̂₂₁, b̂₂₂]` after `t` periods.
    pub weights: [f64; 4],
}

fn log_cubic(t: f64) -> f64 {
    (t + 1.0).ln() + (t + 2.0).ln() + (t + 3.0).ln()
}

/// `ln R(t) = ln[32 − 12(t+2)2^{−t} − 2^{1−2t}] − ln[(t+1)(t+2)(t+3)]`.
pub fn hotstock_log_ratio(t: usize) -> f64 {
    let tf = t as f64;
    let numer = 32.0
        - 12.0 * (tf + 2.0) * (-tf * std::f64::consts::LN_2).exp()
        - 2.0 * (-2.0 * tf * std::f64::consts::LN_2).exp();
    numer.ln() - log_cubic(tf)
}

/// `ln Ŵ(t) = t ln 2 + ln R(t)`; equivalently `Ŵ = (2^{t+5} − 12(t+2) − 2^{1−t}) / ((t+1)(t+2)(t+3))`.
pub fn hotstock_log_universal_wealth(t: usize) -> f64 {
    t as f64 * std::f64::consts::LN_2 + hotstock_log_ratio(t)
}

/// `[b̂₁₁, b̂₁₂, b̂₂₁, b̂₂₂]` after `t` periods. `b̂₁₂` and `b̂₂₁` use their closed
/// forms divided through by `2^{t+4}`; the buy-and-hold corners share the
/// remainder equally.
pub fn hotstock_weights(t: usize) -> [f64; 4] {
    let tf = t as f64;
    let p = |k: f64| (-k * std::f64::consts::LN_2).exp();
    let denom = 3.0 * (tf + 4.0) * (1.0 - 6.0 * (tf + 2.0) * p(tf + 4.0) - p(2.0 * tf + 4.0));
    let b12 = ((3.0 * tf - 4.0) + 18.0 * (tf + 4.0) * p(tf + 4.0) + p(2.0 * tf + 4.0)) / denom;
    let b21 =
        (4.0 - 36.0 * (tf + 1.0) * p(tf + 4.0) - (3.0 * tf + 19.0) * p(2.0 * tf + 4.0)) / denom;
    let b11 = 0.5 * (1.0 - b12 - b21);
    [b11, b12, b21, b11]
}

pub fn hotstock_closed_forms(t: usize) -> HotStockReport {
    let tf = t as f64;
    let log_universal_wealth = hotstock_log_universal_wealth(t);
    let log_hindsight_wealth = tf * std::f64::consts::LN_2;
    let log_crp_hindsight_wealth = tf * (9.0f64 / 8.0).ln();
    let log_ratio = hotstock_log_ratio(t);
    HotStockReport {
        t,
        log_universal_wealth,
        log_hindsight_wealth,
        log_crp_hindsight_wealth,
        log_ratio,
        universal_wealth: log_universal_wealth.exp(),
        hindsight_wealth: log_hindsight_wealth.exp(),
        crp_hindsight_wealth: log_crp_hindsight_wealth.exp(),
        ratio: log_ratio.exp(),
        weights: hotstock_weights(t),
    }
}

/// Universal 1-linear wealth `Ŝ(t) = ∫₀¹ [(1+c)(1−c/2)]^t dc` by adaptive
/// Gauss–Legendre bisection.
pub fn hotstock_universal_1linear(t: usize) -> f64 {
    let f = |c: f64| ((1.0 + c) * (1.0 - 0.5 * c)).powi(t as i32);
    adaptive_integral(&f, 0.0, 1.0, 1e-14, 40)
}

fn adaptive_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, depth: usize) -> f64 {
    let (x, w) = gauss_legendre::<f64>(10);
    let rule = |lo: f64, hi: f64| -> f64 {
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * f(lo + xi * (hi - lo)))
            .sum::<f64>()
            * (hi - lo)
    };
    fn recurse(
        rule: &impl Fn(f64, f64) -> f64,
        lo: f64,
        hi: f64,
        whole: f64,
        rel_tol: f64,
        depth: usize,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let (left, right) = (rule(lo, mid), rule(mid, hi));
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= rel_tol * split.abs().max(f64::MIN_POSITIVE) {
            return split;
        }
        recurse(rule, lo, mid, left, rel_tol, depth - 1)
            + recurse(rule, mid, hi, right, rel_tol, depth - 1)
    }
    recurse(&rule, a, b, rule(a, b), rel_tol, depth)
}

/// `Ŝ(t)` exactly, from the multinomial expansion
/// `Σ_{k₁+k₂ ≤ t} t!/(k₀! k₁! k₂!) · (−1)^{k₂} / (2^{k₁+k₂} (k₁ + 2k₂ + 1))`.
pub fn hotstock_universal_1linear_series(t: usize) -> BigRational {
    let mut fact = vec![BigInt::one()];
    for j in 1..=t {
        let next = &fact[j - 1] * BigInt::from(j);
        fact.push(next);
    }
    let mut total = BigRational::zero();
    for k1 in 0..=t {
        for k2 in 0..=(t - k1) {
            let k0 = t - k1 - k2;
            let multinomial = &fact[t] / (&fact[k0] * &fact[k1] * &fact[k2]);
            let denom = (BigInt::one() << (k1 + k2)) * BigInt::from(k1 + 2 * k2 + 1);
            let mut term = BigRational::new(multinomial, denom);
            if k2 % 2 == 1 {
                term = -term;
            }
            total += term;
        }
    }
    debug_assert!(total.is_positive());
    total
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One row of the wealth/weight trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotStockRow {
    pub t: usize,
    /// Universal bilinear wealth from the quadrature cloud.
    pub universal_bilinear: f64,
    /// Universal 1-linear wealth from the one-dimensional integral.
    pub universal_1linear: f64,
    pub perfect_trader: f64,
    pub best_crp: f64,
    /// Universal bilinear wealth from the closed form, for comparison.
    pub universal_bilinear_closed_form: f64,
    pub b11: f64,
    pub b12: f64,
    pub b21: f64,
    pub b22: f64,
}

/// Rows `t = 0..=periods`. The bilinear wealth and weights come from running
/// the deterministic quadrature cloud forward; the 1-linear wealth from an
/// independent one-dimensional integral.
pub fn hotstock_trajectory(periods: usize) -> Result<Vec<HotStockRow>> {
    let h = hotstock_history::<f64>(periods);
    let prior = PriorSpec::uniform(2, 2)?;
    let cfg = crate::universal::QuadratureConfig::default();
    let points = crate::universal::quadrature_points_for(periods, 4, &cfg);
    let mut state = UniversalState::<f64>::quadrature(prior, 2, 2, points, 1)?;
    let mut rows = Vec::with_capacity(periods + 1);
    let mut push = |state: &UniversalState<f64>, t: usize| {
        let w = state.current_strategy().weights();
        rows.push(HotStockRow {
            t,
            universal_bilinear: state.log_universal_wealth().exp(),
            universal_1linear: hotstock_universal_1linear(t),
            perfect_trader: (t as f64 * std::f64::consts::LN_2).exp(),
            best_crp: (t as f64 * (9.0f64 / 8.0).ln()).exp(),
            universal_bilinear_closed_form: hotstock_log_universal_wealth(t).exp(),
            b11: w[0],
            b12: w[1],
            b21: w[2],
            b22: w[3],
        });
    };
    push(&state, 0);
    for (t, period) in h.periods().enumerate() {
        state.step(period)?;
        push(&state, t + 1);
    }
    Ok(rows)
}

pub fn trajectory_csv(rows: &[HotStockRow]) -> String {
    let mut out = String::from(
        "t,universal_bilinear,universal_1linear,perfect_trader,best_crp,universal_bilinear_closed_form,b11,b12,b21,b22\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            r.t,
            r.universal_bilinear,
            r.universal_1linear,
            r.perfect_trader,
            r.best_crp,
            r.universal_bilinear_closed_form,
            r.b11,
            r.b12,
            r.b21,
            r.b22
        ));
    }
    out
}
