//! Closed-form solutions of the adaptive focusing NLS
//! `i psi_t = -(sigma/2) psi_ss - beta |psi|^2 psi`
//! and the spatial densities used to fit option curves.
//!
//! All solutions are travelling waves `phi(xi) e^{i(k s - omega t)}` with
//! `xi = s - sigma k t`. The nonlinearity `beta` is either a constant or the
//! adaptive market-heat potential `beta(s) = r sum_i w1_i erf(w2_i s / w3_i)`,
//! which the closed forms use as a frozen coefficient at each evaluation
//! point.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::special::{erf, jacobi_sn_cn_dn, EllipticModulus};

/// One row `(w1, w2, w3)` of adaptive weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRow<T> {
    pub w1: T,
    pub w2: T,
    pub w3: T,
}

/// Synaptic weights of the market-heat potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<WeightRow<T>>", into = "Vec<WeightRow<T>>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct WeightSet<T> {
    rows: Vec<WeightRow<T>>,
}

impl<T: Real> WeightSet<T> {
    pub fn new(rows: Vec<WeightRow<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param("weights", "at least one row required"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.w3 == T::zero() {
                return Err(Error::param("weights", format!("row {i} has w3 = 0")));
            }
            if !(r.w1.is_finite() && r.w2.is_finite() && r.w3.is_finite()) {
                return Err(Error::param("weights", format!("row {i} is not finite")));
            }
        }
        Ok(Self { rows })
    }

    /// Builds rows from a flat `[w1, w2, w3, w1, w2, w3, ...]` slice.
    pub fn from_flat(flat: &[T]) -> Result<Self> {
        if !flat.len().is_multiple_of(3) {
            return Err(Error::Shape(format!(
                "{} weights is not a multiple of 3",
                flat.len()
            )));
        }
        Self::new(
            flat.chunks_exact(3)
                .map(|c| WeightRow {
                    w1: c[0],
                    w2: c[1],
                    w3: c[2],
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[WeightRow<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl<T: Real> TryFrom<Vec<WeightRow<T>>> for WeightSet<T> {
    type Error = Error;

    fn try_from(rows: Vec<WeightRow<T>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl<T> From<WeightSet<T>> for Vec<WeightRow<T>> {
    fn from(w: WeightSet<T>) -> Self {
        w.rows
    }
}

/// Adaptive market-heat potential `beta(r, w)(s) = r sum w1 erf(w2 s / w3)`.
pub fn beta<T: Real>(rate: T, weights: &WeightSet<T>, s: T) -> T {
    rate * weights
        .rows
        .iter()
        .fold(T::zero(), |acc, r| acc + r.w1 * erf(r.w2 * s / r.w3))
}

/// Where the nonlinearity coefficient comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub enum BetaSource<T> {
    Constant(T),
    Adaptive { rate: T, weights: WeightSet<T> },
}

impl<T: Real> BetaSource<T> {
    pub fn at(&self, s: T) -> T {
        match self {
            BetaSource::Constant(b) => *b,
            BetaSource::Adaptive { rate, weights } => beta(*rate, weights, s),
        }
    }

    pub fn constant(&self) -> Option<T> {
        match self {
            BetaSource::Constant(b) => Some(*b),
            BetaSource::Adaptive { .. } => None,
        }
    }
}

/// Which of the two `±` solution branches to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

/// How a negative radicand `∓sigma/beta` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadicandMode {
    /// Reject a negative radicand.
    #[default]
    Signed,
    /// Use `sqrt(|sigma/beta|)`.
    Magnitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlsParams<T> {
    /// Dispersion coefficient (volatility).
    pub sigma: T,
    /// Carrier wave number of the travelling wave (not the strike).
    pub wave_number: T,
    pub modulus: EllipticModulus<T>,
    pub beta: BetaSource<T>,
    pub branch: Branch,
    pub radicand: RadicandMode,
}

impl<T: Real> NlsParams<T> {
    pub fn new(sigma: T, wave_number: T, modulus: T, beta: BetaSource<T>) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::param("sigma", "must be positive"));
        }
        Ok(Self {
            sigma,
            wave_number,
            modulus: EllipticModulus::new(modulus)?,
            beta,
            branch: Branch::Plus,
            radicand: RadicandMode::Signed,
        })
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_radicand(mut self, mode: RadicandMode) -> Self {
        self.radicand = mode;
        self
    }

    /// Travelling coordinate `xi = s - sigma k t`.
    pub fn xi(&self, s: T, t: T) -> T {
        s - self.sigma * self.wave_number * t
    }

    fn sign(&self) -> T {
        match self.branch {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    /// `sqrt(orientation * sigma / beta(s))` with the radicand policy applied.
    fn amplitude(&self, s: T, orientation: T) -> Result<T> {
        let b = self.beta.at(s);
        if b == T::zero() {
            return Err(Error::SingularAmplitude {
                s: s.to_f64().unwrap_or(f64::NAN),
            });
        }
        let radicand = orientation * self.sigma / b;
        if radicand < T::zero() && self.radicand == RadicandMode::Signed {
            return Err(Error::NegativeRadicand {
                s: s.to_f64().unwrap_or(f64::NAN),
                radicand: radicand.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(radicand.abs().sqrt())
    }

    fn carrier(&self, s: T, t: T, frequency_factor: T) -> Complex<T> {
        let k = self.wave_number;
        Complex::from_polar(
            T::one(),
            k * s - T::lit(0.5) * self.sigma * t * frequency_factor,
        )
    }
}

/// Periodic solution `± m sqrt(-sigma/beta) sn(xi | m^2) e^{i[k s - sigma t (1 + m^2 + k^2)/2]}`.
///
/// The Jacobi functions take parameter `m^2`; only then is the expression
/// an exact solution for constant `beta`.
pub fn psi_sn<T: Real>(s: T, t: T, p: &NlsParams<T>) -> Result<Complex<T>> {
    let m = p.modulus.value();
    let amp = p.amplitude(s, -T::one())?;
    let (sn, _, _) = jacobi_sn_cn_dn(p.xi(s, t), EllipticModulus::new(m * m)?);
    let k = p.wave_number;
    let phase = p.carrier(s, t, T::one() + m * m + k * k);
    Ok(phase * (p.sign() * m * amp * sn))
}

/// Envelope shock wave (dark soliton) `± sqrt(-sigma/beta) tanh(xi) e^{i[k s - sigma t (2 + k^2)/2]}`.
pub fn psi_shock<T: Real>(s: T, t: T, p: &NlsParams<T>) -> Result<Complex<T>> {
    let amp = p.amplitude(s, -T::one())?;
    let k = p.wave_number;
    let phase = p.carrier(s, t, T::lit(2.0) + k * k);
    Ok(phase * (p.sign() * amp * p.xi(s, t).tanh()))
}

/// Periodic solution `± m sqrt(sigma/beta) cn(xi | m^2) e^{i[k s - sigma t (1 - 2m^2 + k^2)/2]}`.
pub fn psi_cn<T: Real>(s: T, t: T, p: &NlsParams<T>) -> Result<Complex<T>> {
    let m = p.modulus.value();
    let amp = p.amplitude(s, T::one())?;
    let (_, cn, _) = jacobi_sn_cn_dn(p.xi(s, t), EllipticModulus::new(m * m)?);
    let k = p.wave_number;
    let phase = p.carrier(s, t, T::one() - T::lit(2.0) * m * m + k * k);
    Ok(phase * (p.sign() * m * amp * cn))
}

/// Bright soliton `± sqrt(sigma/beta) sech(xi) e^{i[k s - sigma t (k^2 - 1)/2]}`.
pub fn psi_soliton<T: Real>(s: T, t: T, p: &NlsParams<T>) -> Result<Complex<T>> {
    let amp = p.amplitude(s, T::one())?;
    let k = p.wave_number;
    let phase = p.carrier(s, t, k * k - T::one());
    Ok(phase * (p.sign() * amp * p.xi(s, t).cosh().recip()))
}

/// The four closed-form families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solution {
    Sn,
    Shock,
    Cn,
    Soliton,
}

impl Solution {
    pub fn eval<T: Real>(self, s: T, t: T, p: &NlsParams<T>) -> Result<Complex<T>> {
        match self {
            Solution::Sn => psi_sn(s, t, p),
            Solution::Shock => psi_shock(s, t, p),
            Solution::Cn => psi_cn(s, t, p),
            Solution::Soliton => psi_soliton(s, t, p),
        }
    }
}

/// Max-norm residual of the travelling-wave ODE
/// `(sigma/2) phi'' + (omega - sigma k^2 / 2) phi + beta phi^3 = 0`
/// over interior samples, with `phi''` from second-order central differences.
///
/// With `sigma = 2`, `k = 0` this is the anharmonic oscillator
/// `phi'' + omega phi + beta phi^3 = 0`.
pub fn oscillator_residual<T: Real>(
    phi: &[T],
    spacing: T,
    omega: T,
    p: &NlsParams<T>,
) -> Result<T> {
    if phi.len() < 3 {
        return Err(Error::LatticeTooSmall {
            axis: "xi",
            needed: 3,
            got: phi.len(),
        });
    }
    let b = p
        .beta
        .constant()
        .ok_or_else(|| Error::param("beta", "oscillator residual needs a constant beta"))?;
    let half = T::lit(0.5);
    let linear = omega - half * p.sigma * p.wave_number * p.wave_number;
    let h2 = spacing * spacing;
    Ok(phi.windows(3).fold(T::zero(), |acc, w| {
        let second = (w[0] - T::lit(2.0) * w[1] + w[2]) / h2;
        let r = half * p.sigma * second + linear * w[1] + b * w[1] * w[1] * w[1];
        acc.max(r.abs())
    }))
}

/// Weights `(d1, d2)` of the tanh/sech blend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendCoefficients<T> {
    pub d1: T,
    pub d2: T,
}

impl<T: Real> BlendCoefficients<T> {
    pub fn new(d1: T, d2: T) -> Result<Self> {
        if !(d1.is_finite() && d2.is_finite()) || (d1 == T::zero() && d2 == T::zero()) {
            return Err(Error::param(
                "d",
                "blend weights must be finite and not both zero",
            ));
        }
        Ok(Self { d1, d2 })
    }
}

fn pdf_scale<T: Real>(s: T, p: &NlsParams<T>) -> Result<T> {
    let b = p.beta.at(s);
    if b == T::zero() {
        return Err(Error::SingularAmplitude {
            s: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    // |sqrt(sigma/beta) x|^2 = |sigma/beta| x^2 for real x, whatever the sign.
    Ok((p.sigma / b).abs())
}

/// `|sqrt(sigma/beta) tanh(s - k t sigma)|^2`.
pub fn spatial_pdf_shock<T: Real>(s: T, p: &NlsParams<T>, t: T) -> Result<T> {
    let th = p.xi(s, t).tanh();
    Ok(pdf_scale(s, p)? * th * th)
}

/// `|sqrt(sigma/beta) (d1 tanh(s - k t sigma) + d2 sech(s - k t sigma))|^2`.
pub fn spatial_pdf_blend<T: Real>(
    s: T,
    p: &NlsParams<T>,
    t: T,
    d: BlendCoefficients<T>,
) -> Result<T> {
    let xi = p.xi(s, t);
    let shape = d.d1 * xi.tanh() + d.d2 * xi.cosh().recip();
    Ok(pdf_scale(s, p)? * shape * shape)
}
