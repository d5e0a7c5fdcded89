//! Shared market types: price grids, option parameters, geometric Brownian
//! motion paths and complex wave fields sampled on a price grid.
//!
//! Random paths are drawn from `ChaCha20Rng` (seeded with `seed_from_u64`)
//! and standard normals from `rand_distr::StandardNormal` (ziggurat), so a
//! seed identifies a path across platforms.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Minimum number of nodes in a [`SpatialGrid`].
pub const MIN_GRID_POINTS: usize = 8;

/// Uniform grid over stock prices `[s_min, s_max]`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid<T>", into = "RawGrid<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct SpatialGrid<T> {
    s_min: T,
    s_max: T,
    n_points: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid<T> {
    s_min: T,
    s_max: T,
    n_points: usize,
}

impl<T: Real> TryFrom<RawGrid<T>> for SpatialGrid<T> {
    type Error = Error;

    fn try_from(r: RawGrid<T>) -> Result<Self> {
        Self::new(r.s_min, r.s_max, r.n_points)
    }
}

impl<T> From<SpatialGrid<T>> for RawGrid<T> {
    fn from(g: SpatialGrid<T>) -> Self {
        Self {
            s_min: g.s_min,
            s_max: g.s_max,
            n_points: g.n_points,
        }
    }
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(s_min: T, s_max: T, n_points: usize) -> Result<Self> {
        if !(s_min.is_finite() && s_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if s_min >= s_max {
            return Err(Error::InvalidGrid(format!(
                "s_min ({s_min}) must be below s_max ({s_max})"
            )));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{n_points} nodes requested, at least {MIN_GRID_POINTS} required"
            )));
        }
        Ok(Self {
            s_min,
            s_max,
            n_points,
        })
    }

    /// Grid of `n_points` nodes covering one period `[s_min, s_min + period)`,
    /// the right end excluded.
    pub fn periodic(s_min: T, period: T, n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Self::new(s_min, s_min + period, n_points);
        }
        let h = period / T::count(n_points);
        Self::new(s_min, s_min + period - h, n_points)
    }

    pub fn s_min(&self) -> T {
        self.s_min
    }

    pub fn s_max(&self) -> T {
        self.s_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Node spacing `(s_max - s_min) / (n_points - 1)`.
    pub fn spacing(&self) -> T {
        (self.s_max - self.s_min) / T::count(self.n_points - 1)
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            self.s_max
        } else {
            self.s_min + T::count(i) * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n_points.is_power_of_two()
    }

    /// Period seen by spectral routines, `n_points * spacing`.
    pub fn period(&self) -> T {
        T::count(self.n_points) * self.spacing()
    }

    pub(crate) fn require_power_of_two(&self) -> Result<()> {
        if self.is_power_of_two() {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!(
                "spectral operations need a power-of-two node count, got {}",
                self.n_points
            )))
        }
    }
}

/// Contract inputs of a European option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionParams<T> {
    pub strike: T,
    pub rate: T,
    pub volatility: T,
    pub maturity: T,
    #[serde(default)]
    pub dividend_yield: T,
}

impl<T: Real> OptionParams<T> {
    /// Reference set used by the reproduction runs: k = 100, r = 0.05,
    /// delta = 0, sigma = 0.2, T = 1.
    pub fn reference() -> Self {
        Self {
            strike: T::lit(100.0),
            rate: T::lit(0.05),
            volatility: T::lit(0.2),
            maturity: T::one(),
            dividend_yield: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volatility > T::zero() && self.volatility.is_finite()) {
            return Err(Error::param("volatility", "must be positive and finite"));
        }
        if !(self.maturity > T::zero() && self.maturity.is_finite()) {
            return Err(Error::param("maturity", "must be positive and finite"));
        }
        if !(self.strike > T::zero() && self.strike.is_finite()) {
            return Err(Error::param("strike", "must be positive and finite"));
        }
        if !self.rate.is_finite() {
            return Err(Error::param("rate", "must be finite"));
        }
        if !self.dividend_yield.is_finite() {
            return Err(Error::param("dividend_yield", "must be finite"));
        }
        Ok(())
    }
}

/// Sampled geometric Brownian motion path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmPath<T> {
    pub times: Vec<T>,
    pub prices: Vec<T>,
    pub drift: T,
    pub volatility: T,
    pub seed: u64,
}

/// One exact log-space step of `ds = mu s dt + sigma s dW`.
#[inline]
fn gbm_step<T: Real>(s: T, drift: T, volatility: T, dt: T, xi: T) -> T {
    let half = T::lit(0.5);
    s * ((drift - half * volatility * volatility) * dt + volatility * dt.sqrt() * xi).exp()
}

fn validate_gbm<T: Real>(s0: T, volatility: T, horizon: T) -> Result<()> {
    if !(s0 > T::zero() && s0.is_finite()) {
        return Err(Error::param("s0", "initial price must be positive"));
    }
    if !(volatility >= T::zero() && volatility.is_finite()) {
        return Err(Error::param("volatility", "must be non-negative"));
    }
    if !(horizon >= T::zero() && horizon.is_finite()) {
        return Err(Error::param("horizon", "must be non-negative"));
    }
    Ok(())
}

/// Samples `s(t) = s0 exp((mu - sigma^2/2) t + sigma W(t))` on `n_steps`
/// equal steps over `[0, horizon]`.
pub fn simulate_gbm<T: Real>(
    s0: T,
    drift: T,
    volatility: T,
    horizon: T,
    n_steps: usize,
    seed: u64,
) -> Result<GbmPath<T>> {
    validate_gbm(s0, volatility, horizon)?;
    if n_steps == 0 {
        return Err(Error::param("n_steps", "at least one step required"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dt = horizon / T::count(n_steps);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut prices = Vec::with_capacity(n_steps + 1);
    times.push(T::zero());
    prices.push(s0);
    let mut s = s0;
    for i in 1..=n_steps {
        let xi: f64 = StandardNormal.sample(&mut rng);
        s = gbm_step(s, drift, volatility, dt, T::lit(xi));
        times.push(if i == n_steps {
            horizon
        } else {
            T::count(i) * dt
        });
        prices.push(s);
    }
    Ok(GbmPath {
        times,
        prices,
        drift,
        volatility,
        seed,
    })
}

/// Draws `n_paths` independent terminal prices `s(horizon)` from one seeded
/// stream using the same exact solution as [`simulate_gbm`].
pub fn sample_terminal_prices<T: Real>(
    s0: T,
    drift: T,
    volatility: T,
    horizon: T,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<T>> {
    validate_gbm(s0, volatility, horizon)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok((0..n_paths)
        .map(|_| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            gbm_step(s0, drift, volatility, horizon, T::lit(xi))
        })
        .collect())
}

/// Complex samples `psi(s_i, t)` on a uniform price grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField<T> {
    grid: SpatialGrid<T>,
    time: T,
    values: Vec<Complex<T>>,
}

impl<T: Real> WaveField<T> {
    pub fn new(grid: SpatialGrid<T>, time: T, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "{} values for a {}-node grid",
                values.len(),
                grid.n_points()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite(format!("wave field entry {i}")));
        }
        Ok(Self { grid, time, values })
    }

    /// Samples `f(s)` at every grid node.
    pub fn from_fn(grid: SpatialGrid<T>, time: T, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, time, values)
    }

    /// Fallible variant of [`WaveField::from_fn`].
    pub fn try_from_fn(
        grid: SpatialGrid<T>,
        time: T,
        f: impl Fn(T) -> Result<Complex<T>>,
    ) -> Result<Self> {
        let values = grid
            .nodes()
            .into_iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, time, values)
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub(crate) fn with_values(&self, time: T, values: Vec<Complex<T>>) -> Self {
        Self {
            grid: self.grid,
            time,
            values,
        }
    }

    /// `|psi|^2` at every node.
    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Discrete L2 norm `ds * sum |psi_i|^2` (rectangle rule, spectrally
    /// accurate for periodic or decayed fields).
    pub fn norm_sqr(&self) -> T {
        self.grid.spacing()
            * self
                .values
                .iter()
                .fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// Checks `|psi|` at both end nodes against `rel_tol * max |psi|`.
    pub fn check_boundary_decay(&self, rel_tol: T) -> Result<()> {
        let peak = self
            .values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.norm()));
        let first = self
            .values
            .first()
            .map(|v| v.norm())
            .unwrap_or_else(T::zero);
        let last = self.values.last().map(|v| v.norm()).unwrap_or_else(T::zero);
        let edge = first.max(last);
        if peak > T::zero() && edge > rel_tol * peak {
            return Err(Error::BoundaryDecay {
                edge: edge.to_f64().unwrap_or(f64::NAN),
                peak: peak.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

pub fn make_grid<T: Real>(s_min: T, s_max: T, n_points: usize) -> Result<SpatialGrid<T>> {
    SpatialGrid::new(s_min, s_max, n_points)
}
