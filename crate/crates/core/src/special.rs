//! Error function, standard normal distribution and Jacobi elliptic
//! functions.
//!
//! The elliptic routines take the *parameter* `m` (so `sn(u, m)` with
//! `m = k^2` in the modulus convention). `m = 0` gives the circular
//! functions and `m = 1` the hyperbolic ones.

use crate::error::{Error, Result};
use crate::real::{tiny, Real};

/// Switch-over point between the power series and the continued fraction.
const ERF_SERIES_LIMIT: f64 = 3.0;
/// Below this `erfc` is `1 - erf`; above, the continued fraction keeps
/// relative accuracy in the tail.
const ERFC_FRACTION_LIMIT: f64 = 1.0;
const MAX_FRACTION_TERMS: usize = 2000;
const MAX_SERIES_TERMS: usize = 500;

/// `erf(x) = 2/sqrt(pi) * integral_0^x exp(-t^2) dt`.
///
/// For `|x| < 3` uses the all-positive series
/// `erf x = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`;
/// beyond it `1 - erfc(x)` with the Laplace continued fraction.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let v = if ax < T::lit(ERF_SERIES_LIMIT) {
        erf_series(ax)
    } else {
        T::one() - erfc_continued_fraction(ax)
    };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

/// Complementary error function `1 - erf(x)`, accurate in the tail.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x >= T::lit(ERFC_FRACTION_LIMIT) {
        erfc_continued_fraction(x)
    } else if x <= -T::lit(ERF_SERIES_LIMIT) {
        T::lit(2.0) - erfc_continued_fraction(-x)
    } else {
        T::one() - erf(x)
    }
}

fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let eps = T::epsilon() * T::lit(0.5);
    for n in 1..MAX_SERIES_TERMS {
        term = term * T::lit(2.0) * x2 / T::count(2 * n + 1);
        sum += term;
        if term <= eps * sum {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() * (-x2).exp() * sum
}

/// `erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`,
/// evaluated with the modified Lentz algorithm; `x > 0`.
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let floor = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for n in 1..MAX_FRACTION_TERMS {
        let a = T::count(n) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < floor {
            d = floor;
        }
        c = x + a / c;
        if c.abs() < floor {
            c = floor;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    (-x * x).exp() * T::lit(0.5) * T::FRAC_2_SQRT_PI() / f
}

/// `N(x) = (1 + erf(x / sqrt 2)) / 2`, taken as `erfc(-x / sqrt 2) / 2` for
/// `x < 0` so the lower tail keeps its relative accuracy.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    let z = x * T::FRAC_1_SQRT_2();
    if x < T::zero() {
        T::lit(0.5) * erfc(-z)
    } else {
        T::lit(0.5) * (T::one() + erf(z))
    }
}

/// Standard normal density.
pub fn std_normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) * T::lit(0.5)).exp() / (T::lit(2.0) * T::PI()).sqrt()
}

/// Elliptic parameter `m` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus<T>(T);

impl<T: Real> EllipticModulus<T> {
    pub fn new(m: T) -> Result<Self> {
        if m >= T::zero() && m <= T::one() {
            Ok(Self(m))
        } else {
            Err(Error::param(
                "m",
                format!("elliptic parameter {m} outside [0, 1]"),
            ))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Upper bound on AGM iterations; convergence is quadratic so a few dozen
/// suffice even for `m` within rounding of 1.
const MAX_AGM_ITER: usize = 64;

/// Quarter period `K(m) = pi / (2 AGM(1, sqrt(1 - m)))`; infinite at `m = 1`.
pub fn elliptic_k<T: Real>(m: EllipticModulus<T>) -> T {
    let m = m.value();
    if m == T::one() {
        return T::infinity();
    }
    let mut a = T::one();
    let mut b = (T::one() - m).sqrt();
    let tol = tiny::<T>(1e-15);
    for _ in 0..MAX_AGM_ITER {
        if (a - b).abs() < tol * a {
            break;
        }
        let next = (a + b) * T::lit(0.5);
        b = (a * b).sqrt();
        a = next;
    }
    T::FRAC_PI_2() / a
}

/// Jacobi `(sn, cn, dn)` of `u` at parameter `m`.
///
/// Descending Landen transformation: the AGM sequence
/// `a_{n+1} = (a_n + b_n)/2, b_{n+1} = sqrt(a_n b_n), c_{n+1} = (a_n - b_n)/2`
/// starting from `(1, sqrt(1-m), sqrt m)` is run until `c_N < 1e-15`, then the
/// amplitude is recovered from `phi_N = 2^N a_N u` by
/// `phi_{n-1} = (phi_n + asin(c_n sin(phi_n) / a_n)) / 2`.
/// `m = 1` takes the hyperbolic limit directly.
pub fn jacobi_sn_cn_dn<T: Real>(u: T, m: EllipticModulus<T>) -> (T, T, T) {
    let m = m.value();
    if m == T::zero() {
        return (u.sin(), u.cos(), T::one());
    }
    if m == T::one() {
        let sech = u.cosh().recip();
        return (u.tanh(), sech, sech);
    }

    let tol = tiny::<T>(1e-15);
    let mut a = [T::zero(); MAX_AGM_ITER + 1];
    let mut c = [T::zero(); MAX_AGM_ITER + 1];
    a[0] = T::one();
    c[0] = m.sqrt();
    let mut b = (T::one() - m).sqrt();
    let mut n = 0;
    while c[n].abs() >= tol && n < MAX_AGM_ITER {
        let (an, bn) = (a[n], b);
        a[n + 1] = (an + bn) * T::lit(0.5);
        c[n + 1] = (an - bn) * T::lit(0.5);
        b = (an * bn).sqrt();
        n += 1;
    }

    let mut phi = T::lit(2.0).powi(n as i32) * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        let ratio = (c[j] * phi.sin() / a[j]).max(-T::one()).min(T::one());
        phi = (phi + ratio.asin()) * T::lit(0.5);
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn = cos(phi_0) / cos(phi_1 - phi_0)
    let dn = if n == 0 {
        T::one()
    } else {
        cn / (prev - phi).cos()
    };
    (sn, cn, dn)
}

pub fn jacobi_sn<T: Real>(u: T, m: EllipticModulus<T>) -> T {
    jacobi_sn_cn_dn(u, m).0
}

pub fn jacobi_cn<T: Real>(u: T, m: EllipticModulus<T>) -> T {
    jacobi_sn_cn_dn(u, m).1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: f64) -> EllipticModulus<f64> {
        EllipticModulus::new(x).unwrap()
    }

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(6.0f64) - 1.0).abs() < 1e-15);
        // (2/sqrt(pi)) * integral_0^1 e^{-t^2} dt, 30-digit quadrature
        assert!((erf(1.0f64) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(-1.0f64) + 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(3.0f64) - 0.999_977_909_503_001_4).abs() < 1e-15);
        assert!((erfc(5.0f64) - 1.537_459_794_428_034_8e-12).abs() < 1e-24);
    }

    #[test]
    fn erfc_relative_accuracy() {
        for &(x, v) in &[
            (0.5f64, 0.479_500_122_186_953_5),
            (1.0, 0.157_299_207_050_285_13),
            (1.5, 0.033_894_853_524_689_27),
            (2.5, 0.000_406_952_017_444_958_9),
            (2.9, 4.109_787_809_945_886e-5),
        ] {
            assert!(((erfc(x) - v) / v).abs() < 1e-13, "erfc({x})");
        }
        // lower normal tail
        assert!((std_normal_cdf(-8.0f64) / 6.220_960_574_271_784e-16 - 1.0).abs() < 1e-12);
        assert!((std_normal_cdf(-20.0f64) / 2.753_624_118_606_233_7e-89 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erf_single_precision() {
        assert!((erf(1.0f32) - 0.842_700_8).abs() < 1e-6);
        assert!((erf(4.0f32) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn normal_cdf_values_and_reflection() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(2.0f64) + std_normal_cdf(-2.0) - 1.0).abs() < 4e-16);
        assert!((std_normal_cdf(1.0f64) - 0.841_344_746_068_542_9).abs() < 1e-15);
    }

    #[test]
    fn jacobi_at_origin_and_limits() {
        for &mm in &[0.0, 0.3, 0.9, 1.0] {
            assert_eq!(jacobi_sn(0.0, m(mm)), 0.0);
            assert_eq!(jacobi_cn(0.0, m(mm)), 1.0);
        }
        assert!((jacobi_sn(1.2, m(0.0)) - 1.2f64.sin()).abs() < 1e-15);
        assert!((jacobi_cn(1.2, m(0.0)) - 1.2f64.cos()).abs() < 1e-15);
        assert!((jacobi_sn(1.2, m(1.0)) - 0.833_654_607_012_154_9).abs() < 1e-15);
    }

    #[test]
    fn jacobi_against_reference_values() {
        // 30-digit reference values of sn/cn(0.7 | 0.5) and sn(1 | 0.81)
        let (sn, cn, _) = jacobi_sn_cn_dn(0.7, m(0.5));
        assert!((sn - 0.624_340_090_966_217_3).abs() < 1e-14);
        assert!((cn - 0.781_152_642_453_634_3).abs() < 1e-14);
        assert!((jacobi_sn(1.0, m(0.81)) - 0.777_642_128_316_347_2).abs() < 1e-14);
        assert!((elliptic_k(m(0.5)) - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn dn_satisfies_its_identity() {
        for &(u, mm) in &[(0.3, 0.2), (2.5, 0.7), (-4.0, 0.99)] {
            let (sn, _, dn) = jacobi_sn_cn_dn(u, m(mm));
            assert!((dn * dn + mm * sn * sn - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn near_one_parameter_approaches_hyperbolic() {
        for &u in &[-3.0, -0.5, 0.4, 2.0] {
            let sn = jacobi_sn(u, m(1.0 - 1e-12));
            assert!((sn - f64::tanh(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn modulus_rejects_out_of_range() {
        assert!(EllipticModulus::new(-0.1).is_err());
        assert!(EllipticModulus::new(1.1).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
    }

    proptest::proptest! {
        #[test]
        fn erf_is_odd_bounded_monotone(x in -8.0f64..8.0, dx in 1e-6f64..0.5) {
            let (a, b) = (erf(x), erf(x + dx));
            proptest::prop_assert!((erf(-x) + a).abs() < 1e-16);
            proptest::prop_assert!(a.abs() <= 1.0);
            proptest::prop_assert!(b >= a);
        }

        #[test]
        fn sn_has_period_four_k(u in -5.0f64..5.0, mm in 0.0f64..0.99) {
            let k = elliptic_k(m(mm));
            let (a, b) = (jacobi_sn(u, m(mm)), jacobi_sn(u + 4.0 * k, m(mm)));
            proptest::prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
