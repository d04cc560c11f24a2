//! Competitive ratio `R = Ŵ / D`, its uniform lower bound
//! `f̲ / ((T+1)(T+2)…(T+k−1))` with `k = m^H`, and excess growth rates.
//! Everything is carried in the log domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::ln_gamma;
use crate::strategy::tensor_len;
use crate::Scalar;

/// Log-ratios above zero by more than this are reported as estimator or solver error.
pub const RATIO_SLACK: f64 = 1e-8;

/// Half-width of the Monte Carlo band, in standard errors.
pub const BAND_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport<F> {
    /// `ln R = ln Ŵ − ln D`, clipped to `≤ 0`.
    pub log_ratio: F,
    /// `ln R̲`.
    pub log_bound: F,
    /// `−ln R / T`; zero when `T = 0`.
    pub excess_growth_per_period: F,
    pub bound_satisfied: bool,
    /// Set when the raw log-ratio exceeded zero by more than [`RATIO_SLACK`].
    pub clipped: bool,
    /// `(lower, upper)` band on `ln R` for Monte Carlo estimates.
    pub band: Option<(F, F)>,
}

/// `ln R` from the two log-wealths, clipped at zero.
///
/// Returns the log-ratio and whether it had to be clipped beyond [`RATIO_SLACK`].
pub fn competitive_ratio<F: Scalar>(log_universal: F, log_hindsight: F) -> Result<(F, bool)> {
    if log_hindsight.is_nan() || log_universal.is_nan() {
        return Err(Error::InvalidComparison("NaN log-wealth".into()));
    }
    if log_hindsight == F::neg_infinity() {
        return Err(Error::InvalidComparison(
            "hindsight benchmark is ruined; the ratio is undefined".into(),
        ));
    }
    if !log_hindsight.is_finite() || !log_universal.is_finite() {
        return Err(Error::InvalidComparison(format!(
            "non-finite log-wealth (universal {log_universal}, hindsight {log_hindsight})"
        )));
    }
    let raw = log_universal - log_hindsight;
    let clipped = raw > F::lit(RATIO_SLACK);
    Ok((raw.min(F::zero()), clipped))
}

/// Above this many factors the rising factorial is taken as a log-gamma difference.
const DIRECT_SUM_FACTORS: usize = 10_000;

/// `ln[(T+1)(T+2)…(T+n)]`.
pub fn log_rising_factorial<F: Scalar>(periods: u64, factors: usize) -> F {
    let t = F::lit(periods as f64);
    if factors <= DIRECT_SUM_FACTORS {
        // A difference of two large log-gammas loses ~ulp(ln Γ(T)) absolute accuracy.
        (1..=factors).map(|j| (t + F::from_count(j)).ln()).sum()
    } else {
        ln_gamma(t + F::from_count(factors) + F::one()) - ln_gamma(t + F::one())
    }
}

/// `ln f̲ − Σ_{j=1}^{k−1} ln(T + j)` with `k = m^H`, given `ln f̲`.
pub fn log_ratio_lower_bound<F: Scalar>(
    dim: usize,
    order: usize,
    periods: u64,
    log_density_floor: F,
) -> F {
    if log_density_floor == F::neg_infinity() {
        return log_density_floor;
    }
    let k = tensor_len(dim, order);
    log_density_floor - log_rising_factorial(periods, k - 1)
}

/// `ln R̲` for a linear-domain density floor `f̲ ≥ 0`; `f̲ = 0` gives `−∞`.
pub fn ratio_lower_bound<F: Scalar>(dim: usize, order: usize, periods: u64, density_floor: F) -> F {
    let log_floor = if density_floor > F::zero() {
        density_floor.ln()
    } else {
        F::neg_infinity()
    };
    log_ratio_lower_bound(dim, order, periods, log_floor)
}

/// Excess per-period growth of the hindsight benchmark, `−ln R / T`.
pub fn excess_growth<F: Scalar>(log_ratio: F, periods: u64) -> Result<F> {
    if periods == 0 {
        return Err(Error::InvalidComparison("excess growth needs T ≥ 1".into()));
    }
    Ok(-log_ratio / F::lit(periods as f64))
}

/// Worst-case excess growth `[ln(1/f̲) + Σ_{j<k} ln(T+j)] / T`.
pub fn excess_growth_bound<F: Scalar>(
    dim: usize,
    order: usize,
    periods: u64,
    log_density_floor: F,
) -> Result<F> {
    excess_growth(
        log_ratio_lower_bound(dim, order, periods, log_density_floor),
        periods,
    )
}

/// Leading-order behaviour `(k − 1) ln T / T` of the worst-case excess growth.
pub fn excess_growth_asymptote<F: Scalar>(dim: usize, order: usize, periods: u64) -> F {
    let k = tensor_len(dim, order);
    let t = F::lit(periods as f64);
    F::from_count(k - 1) * t.ln() / t
}

/// Full report for one horizon. `log_universal_se` is the standard error of
/// a Monte Carlo `ln Ŵ`; the bound counts as violated only when the whole
/// `±3 s.e.` band lies below it.
pub fn ratio_report<F: Scalar>(
    log_universal: F,
    log_universal_se: Option<F>,
    log_hindsight: F,
    periods: u64,
    log_bound: F,
) -> Result<RatioReport<F>> {
    let (log_ratio, clipped) = competitive_ratio(log_universal, log_hindsight)?;
    let band = log_universal_se.map(|se| {
        let half = F::lit(BAND_WIDTH) * se;
        (
            (log_ratio - half).min(F::zero()),
            (log_ratio + half).min(F::zero()),
        )
    });
    let slack = F::lit(RATIO_SLACK);
    let upper = band.map_or(log_ratio, |(_, hi)| hi);
    Ok(RatioReport {
        log_ratio,
        log_bound,
        excess_growth_per_period: if periods == 0 {
            F::zero()
        } else {
            excess_growth(log_ratio, periods)?
        },
        bound_satisfied: upper >= log_bound - slack,
        clipped,
        band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        let lb: f64 = ratio_lower_bound(2, 2, 5, 6.0);
        assert!((lb.exp() - 1.0 / 56.0).abs() < 1e-14);
        let lb: f64 = ratio_lower_bound(2, 2, 1, 6.0);
        assert!((lb.exp() - 0.25).abs() < 1e-14);
        let lb: f64 = ratio_lower_bound(2, 1, 1, 1.0);
        assert!((lb.exp() - 0.5).abs() < 1e-14);
        let lb: f64 = ratio_lower_bound(2, 2, 0, 6.0);
        assert!(lb.abs() < 1e-14);
        for t in [1u64, 7, 40] {
            let lb: f64 = ratio_lower_bound(2, 2, t, 6.0);
            let tf = t as f64;
            let expect = 6.0 / ((tf + 1.0) * (tf + 2.0) * (tf + 3.0));
            assert!((lb.exp() / expect - 1.0).abs() < 1e-12);
        }
        assert_eq!(ratio_lower_bound(2, 2, 3, 0.0f64), f64::NEG_INFINITY);
    }

    #[test]
    fn bound_is_stable_for_long_horizons() {
        let lb: f64 = ratio_lower_bound(2, 2, 1_000_000, 6.0);
        let direct = 6f64.ln() - (1..=3).map(|j| (1e6 + j as f64).ln()).sum::<f64>();
        assert!((lb - direct).abs() < 1e-9);
    }

    #[test]
    fn rising_factorial_routes_agree() {
        let direct: f64 = log_rising_factorial(12, 20_000);
        let summed: f64 = (1..=20_000).map(|j| (12.0 + j as f64).ln()).sum();
        assert!((direct / summed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_examples() {
        let (r, c) = competitive_ratio(1.125f64.ln(), 2f64.ln()).unwrap();
        assert!((r.exp() - 0.5625).abs() < 1e-15);
        assert!(!c);
        let (r, _) = competitive_ratio(0.3f64, 0.3).unwrap();
        assert_eq!(r, 0.0);
        let (r, c) = competitive_ratio(0.5f64, 0.3).unwrap();
        assert_eq!(r, 0.0);
        assert!(c);
        assert!(competitive_ratio(0.0f64, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn excess_growth_examples() {
        assert_eq!(excess_growth(0.0f64, 3).unwrap(), 0.0);
        assert!((excess_growth(-2.0f64, 4).unwrap() - 0.5).abs() < 1e-15);
        assert!(excess_growth(-1.0f64, 0).is_err());
        let b: f64 = excess_growth_bound(2, 2, 5, 6f64.ln()).unwrap();
        assert!((b - 56f64.ln() / 5.0).abs() < 1e-14);
        let a: f64 = excess_growth_asymptote(2, 2, 100);
        assert!((a - 3.0 * 100f64.ln() / 100.0).abs() < 1e-15);
    }

    #[test]
    fn report_uses_band_upper_edge() {
        // Point estimate slightly below the bound, band reaches above it.
        let rep = ratio_report(-1.02f64, Some(0.01), 0.0, 4, -1.0).unwrap();
        assert!(rep.bound_satisfied);
        let rep = ratio_report(-1.2f64, Some(0.01), 0.0, 4, -1.0).unwrap();
        assert!(!rep.bound_satisfied);
        let rep = ratio_report(-0.5f64, None, 0.0, 0, -1.0).unwrap();
        assert_eq!(rep.excess_growth_per_period, 0.0);
        assert!(rep.band.is_none());
    }
}
