//! Closed-form European option prices and Greeks under Black-Scholes with a
//! continuous dividend yield. These curves are the targets the wave models
//! are fitted against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{OptionParams, SpatialGrid};
use crate::real::Real;
use crate::special::{std_normal_cdf, std_normal_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

/// Sensitivities of a European option price.
///
/// `theta` is the derivative with respect to elapsed time, i.e. minus the
/// derivative with respect to remaining maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreeksReport<T> {
    pub delta: T,
    pub rho: T,
    pub vega: T,
    pub theta: T,
    pub gamma: T,
}

fn check_spot<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "s",
            format!("spot price must be positive, got {s}"),
        ))
    }
}

/// `d1 = (ln(s/k) + T (r - delta + sigma^2/2)) / (sigma sqrt T)`, `d2 = d1 - sigma sqrt T`.
pub fn d1_d2<T: Real>(s: T, p: &OptionParams<T>) -> Result<(T, T)> {
    check_spot(s)?;
    p.validate()?;
    let vol_sqrt_t = p.volatility * p.maturity.sqrt();
    let half = T::lit(0.5);
    let log_moneyness = (s / p.strike).ln();
    let carry = p.rate - p.dividend_yield;
    let d1 =
        (log_moneyness + p.maturity * (carry + half * p.volatility * p.volatility)) / vol_sqrt_t;
    let d2 =
        (log_moneyness + p.maturity * (carry - half * p.volatility * p.volatility)) / vol_sqrt_t;
    Ok((d1, d2))
}

pub fn bs_price<T: Real>(s: T, p: &OptionParams<T>, kind: OptionKind) -> Result<T> {
    let (d1, d2) = d1_d2(s, p)?;
    let div = (-p.dividend_yield * p.maturity).exp();
    let disc = (-p.rate * p.maturity).exp();
    let price = match kind {
        OptionKind::Call => s * std_normal_cdf(d1) * div - p.strike * std_normal_cdf(d2) * disc,
        OptionKind::Put => p.strike * std_normal_cdf(-d2) * disc - s * std_normal_cdf(-d1) * div,
    };
    // Rounding can push a worthless option a hair below zero.
    Ok(price.max(T::zero()))
}

pub fn bs_greeks<T: Real>(s: T, p: &OptionParams<T>, kind: OptionKind) -> Result<GreeksReport<T>> {
    let (d1, d2) = d1_d2(s, p)?;
    let div = (-p.dividend_yield * p.maturity).exp();
    let disc = (-p.rate * p.maturity).exp();
    let sqrt_t = p.maturity.sqrt();
    let pdf = std_normal_pdf(d1);
    let gamma = div * pdf / (s * p.volatility * sqrt_t);
    let vega = s * div * pdf * sqrt_t;
    let decay = -s * div * pdf * p.volatility / (T::lit(2.0) * sqrt_t);
    let report = match kind {
        OptionKind::Call => GreeksReport {
            delta: div * std_normal_cdf(d1),
            rho: p.strike * p.maturity * disc * std_normal_cdf(d2),
            vega,
            theta: decay - p.rate * p.strike * disc * std_normal_cdf(d2)
                + p.dividend_yield * s * div * std_normal_cdf(d1),
            gamma,
        },
        OptionKind::Put => GreeksReport {
            delta: -div * std_normal_cdf(-d1),
            rho: -p.strike * p.maturity * disc * std_normal_cdf(-d2),
            vega,
            theta: decay + p.rate * p.strike * disc * std_normal_cdf(-d2)
                - p.dividend_yield * s * div * std_normal_cdf(-d1),
            gamma,
        },
    };
    Ok(report)
}

/// Prices at every grid node. A node at `s = 0` takes the analytic limit:
/// 0 for a call and `k e^{-rT}` for a put.
pub fn bs_curve<T: Real>(
    grid: &SpatialGrid<T>,
    p: &OptionParams<T>,
    kind: OptionKind,
) -> Result<Vec<T>> {
    p.validate()?;
    if grid.s_min() < T::zero() {
        return Err(Error::InvalidGrid("option curves need s_min >= 0".into()));
    }
    grid.nodes()
        .into_iter()
        .map(|s| {
            if s == T::zero() {
                Ok(match kind {
                    OptionKind::Call => T::zero(),
                    OptionKind::Put => p.strike * (-p.rate * p.maturity).exp(),
                })
            } else {
                bs_price(s, p, kind)
            }
        })
        .collect()
}

/// Put-call parity gap `call - put - (s e^{-delta T} - k e^{-rT})`.
pub fn parity_gap<T: Real>(s: T, p: &OptionParams<T>) -> Result<T> {
    let call = bs_price(s, p, OptionKind::Call)?;
    let put = bs_price(s, p, OptionKind::Put)?;
    let forward =
        s * (-p.dividend_yield * p.maturity).exp() - p.strike * (-p.rate * p.maturity).exp();
    Ok(call - put - forward)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> OptionParams<f64> {
        OptionParams::reference()
    }

    #[test]
    fn d1_d2_at_the_money_forward() {
        let p = OptionParams {
            dividend_yield: 0.05,
            ..reference()
        };
        let (d1, d2) = d1_d2(100.0, &p).unwrap();
        assert!((d1 - 0.1).abs() < 1e-15);
        assert!((d2 + 0.1).abs() < 1e-15);
    }

    #[test]
    fn d1_d2_reference_values() {
        let (d1, d2) = d1_d2(100.0, &reference()).unwrap();
        assert!((d1 - 0.35).abs() < 1e-14);
        assert!((d2 - 0.15).abs() < 1e-14);
        assert!((d1 - d2 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(d1_d2(0.0, &reference()).is_err());
        let bad = OptionParams {
            volatility: 0.0,
            ..reference()
        };
        assert!(bs_price(100.0, &bad, OptionKind::Call).is_err());
        let bad = OptionParams {
            maturity: -1.0,
            ..reference()
        };
        assert!(bs_price(100.0, &bad, OptionKind::Put).is_err());
    }

    #[test]
    fn reference_prices() {
        // 30-digit evaluation of the closed forms
        let call = bs_price(100.0, &reference(), OptionKind::Call).unwrap();
        let put = bs_price(100.0, &reference(), OptionKind::Put).unwrap();
        assert!((call - 10.450_583_572_185_567).abs() < 1e-12);
        assert!((put - 5.573_526_022_256_968).abs() < 1e-12);
    }

    #[test]
    fn deep_in_the_money_and_expiry_limits() {
        let p = reference();
        let s = 1e6;
        let call = bs_price(s, &p, OptionKind::Call).unwrap();
        assert!((call - (s - 100.0 * (-0.05f64).exp())).abs() < 1e-6);

        let short = OptionParams {
            maturity: 1e-12,
            ..p
        };
        assert!((bs_price(120.0, &short, OptionKind::Call).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn delta_limits_and_parity() {
        let p = OptionParams {
            dividend_yield: 0.02,
            ..reference()
        };
        let far = bs_greeks(1e5, &p, OptionKind::Call).unwrap();
        assert!((far.delta - (-0.02f64).exp()).abs() < 1e-12);
        for &s in &[60.0, 100.0, 150.0] {
            let c = bs_greeks(s, &p, OptionKind::Call).unwrap();
            let q = bs_greeks(s, &p, OptionKind::Put).unwrap();
            assert!((c.delta - q.delta - (-0.02f64).exp()).abs() < 1e-14);
            assert!(c.gamma >= 0.0);
        }
    }

    #[test]
    fn greeks_match_central_differences() {
        let p = reference();
        for kind in [OptionKind::Call, OptionKind::Put] {
            let g = bs_greeks(100.0, &p, kind).unwrap();
            let price = |s: f64, q: OptionParams<f64>| bs_price(s, &q, kind).unwrap();
            let hs = 1e-5 * 100.0;
            let delta = (price(100.0 + hs, p) - price(100.0 - hs, p)) / (2.0 * hs);
            let gamma =
                (price(100.0 + hs, p) - 2.0 * price(100.0, p) + price(100.0 - hs, p)) / (hs * hs);
            let hr = 1e-5 * p.rate;
            let rho = (price(
                100.0,
                OptionParams {
                    rate: p.rate + hr,
                    ..p
                },
            ) - price(
                100.0,
                OptionParams {
                    rate: p.rate - hr,
                    ..p
                },
            )) / (2.0 * hr);
            let hv = 1e-5 * p.volatility;
            let vega = (price(
                100.0,
                OptionParams {
                    volatility: p.volatility + hv,
                    ..p
                },
            ) - price(
                100.0,
                OptionParams {
                    volatility: p.volatility - hv,
                    ..p
                },
            )) / (2.0 * hv);
            let ht = 1e-5 * p.maturity;
            let theta = -(price(
                100.0,
                OptionParams {
                    maturity: p.maturity + ht,
                    ..p
                },
            ) - price(
                100.0,
                OptionParams {
                    maturity: p.maturity - ht,
                    ..p
                },
            )) / (2.0 * ht);
            for (a, b) in [
                (g.delta, delta),
                (g.gamma, gamma),
                (g.rho, rho),
                (g.vega, vega),
                (g.theta, theta),
            ] {
                assert!(
                    ((a - b) / a).abs() < 1e-5,
                    "{kind:?}: analytic {a} vs fd {b}"
                );
            }
        }
    }

    #[test]
    fn curve_boundary_and_monotonicity() {
        let g = SpatialGrid::new(0.0, 200.0, 256).unwrap();
        let p = reference();
        let calls = bs_curve(&g, &p, OptionKind::Call).unwrap();
        let puts = bs_curve(&g, &p, OptionKind::Put).unwrap();
        assert_eq!(calls[0], 0.0);
        assert!((puts[0] - 100.0 * (-0.05f64).exp()).abs() < 1e-14);
        assert!(calls.windows(2).all(|w| w[1] >= w[0]));
        for (i, s) in g.nodes().into_iter().enumerate().skip(1) {
            assert_eq!(calls[i], bs_price(s, &p, OptionKind::Call).unwrap());
        }
    }

    proptest::proptest! {
        #[test]
        fn put_call_parity(s in 20.0f64..300.0, vol in 0.05f64..0.8, r in -0.02f64..0.15, t in 0.05f64..3.0) {
            let p = OptionParams { strike: 100.0, rate: r, volatility: vol, maturity: t, dividend_yield: 0.01 };
            proptest::prop_assert!(parity_gap(s, &p).unwrap().abs() < 1e-10);
        }
    }
}
