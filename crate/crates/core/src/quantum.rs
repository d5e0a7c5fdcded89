//! Linear wave model: de Broglie plane waves, option wave packets and the
//! free Schrodinger evolution `i sigma psi_t = -(sigma^2/2) psi_ss`, in which
//! the volatility plays the role of Planck's constant.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::WaveField;
use crate::real::{Real, SpectralReal};
use crate::spectral::{wavenumbers, Spectral};

/// Relative size of `|psi|` at the grid ends below which a field counts as
/// decayed for periodic spectral evolution.
pub const BOUNDARY_DECAY_TOL: f64 = 1e-10;

/// Whether spectral routines insist on a field that has decayed at the
/// domain ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Reject fields that have not decayed to `1e-10` of their peak.
    #[default]
    RequireDecay,
    /// Treat the samples as one period of a periodic field.
    Periodic,
}

/// `A e^{i(k s - sigma k^2 t / 2)}`.
pub fn plane_wave<T: Real>(s: T, t: T, amplitude: T, k: T, sigma: T) -> Complex<T> {
    Complex::from_polar(amplitude, k * s - T::lit(0.5) * sigma * k * k * t)
}

/// One component `(k_i, c_i)` of a wave packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWave<T> {
    pub k: T,
    pub c: T,
}

/// Superposition `psi = sum_i c_i e^{i(k_i s - sigma k_i^2 t / 2)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveBasis<T> {
    sigma: T,
    waves: Vec<PlaneWave<T>>,
}

impl<T: Real> PlaneWaveBasis<T> {
    /// Physical basis: `sigma > 0`.
    pub fn new(sigma: T, waves: Vec<PlaneWave<T>>) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::param("sigma", "must be positive"));
        }
        Self::fitted(sigma, waves)
    }

    /// Basis produced by curve fitting, where `sigma` may take any finite
    /// value (published fits report negative ones).
    pub fn fitted(sigma: T, waves: Vec<PlaneWave<T>>) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::param("sigma", "must be finite"));
        }
        if waves.is_empty() {
            return Err(Error::param("waves", "at least one plane wave required"));
        }
        if waves.iter().any(|w| !(w.k.is_finite() && w.c.is_finite())) {
            return Err(Error::param(
                "waves",
                "wave numbers and amplitudes must be finite",
            ));
        }
        Ok(Self { sigma, waves })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn waves(&self) -> &[PlaneWave<T>] {
        &self.waves
    }

    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn with_sigma(&self, sigma: T) -> Self {
        Self {
            sigma,
            waves: self.waves.clone(),
        }
    }
}

pub fn wave_packet<T: Real>(s: T, t: T, basis: &PlaneWaveBasis<T>) -> Complex<T> {
    basis
        .waves
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, w| {
            acc + plane_wave(s, t, w.c, w.k, basis.sigma)
        })
}

/// Model PDF `|psi(s, t)|^2` of a wave packet.
pub fn packet_density<T: Real>(s: T, t: T, basis: &PlaneWaveBasis<T>) -> T {
    wave_packet(s, t, basis).norm_sqr()
}

/// Kinematics of one plane-wave mode under `omega = sigma k^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport<T> {
    pub k: T,
    pub momentum: T,
    pub omega_k: T,
    /// `2 pi / k`; `None` for `k = 0`.
    pub lambda_k: Option<T>,
    /// `2 pi / omega_k`; `None` for `k = 0`.
    pub period_k: Option<T>,
    /// `omega_k / k`; `None` for `k = 0`.
    pub v_phase: Option<T>,
    pub v_group: T,
    pub energy_k: T,
    /// `t d omega / dk`.
    pub packet_center: T,
}

pub fn dispersion<T: Real>(k: T, sigma: T, t: T) -> DispersionReport<T> {
    let two_pi = T::lit(2.0) * T::PI();
    let omega = T::lit(0.5) * sigma * k * k;
    let v_group = sigma * k;
    let defined = k != T::zero();
    DispersionReport {
        k,
        momentum: sigma * k,
        omega_k: omega,
        lambda_k: defined.then(|| two_pi / k),
        period_k: defined.then(|| two_pi / omega),
        v_phase: defined.then(|| omega / k),
        v_group,
        energy_k: T::lit(0.5) * (sigma * k) * (sigma * k),
        packet_center: t * v_group,
    }
}

/// Mean energy over the Boltzmann ensemble of quanta,
/// `<E> = E_k / (exp(E_k / (b T)) - 1)`; `b T` at `E_k = 0`.
pub fn boltzmann_mean_energy<T: Real>(
    energy_k: T,
    kinetic_constant: T,
    market_temperature: T,
) -> Result<T> {
    let bt = kinetic_constant * market_temperature;
    if !(kinetic_constant > T::zero() && market_temperature > T::zero()) {
        return Err(Error::param(
            "b T",
            "kinetic constant and market temperature must be positive",
        ));
    }
    if energy_k < T::zero() {
        return Err(Error::param("energy_k", "must be non-negative"));
    }
    if energy_k == T::zero() {
        return Ok(bt);
    }
    Ok(energy_k / (energy_k / bt).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacketSpec<T> {
    /// Inverse-variance scale `a` of `e^{-a s^2 / 2}`.
    pub width: T,
    pub s0: T,
    pub p0: T,
}

impl<T: Real> GaussianPacketSpec<T> {
    pub fn new(width: T, s0: T, p0: T) -> Result<Self> {
        if !(width > T::zero() && width.is_finite()) {
            return Err(Error::param("width", "must be positive"));
        }
        Ok(Self { width, s0, p0 })
    }
}

/// Closed-form free evolution of a normalised Gaussian packet,
/// `sqrt(sqrt(a/pi) / (1 + i a tau)) exp((-a(s-s0)^2/2 - i p0^2 tau/2 + i p0 (s-s0)) / (1 + i a tau))`
/// with `tau = sigma t`.
pub fn gaussian_packet<T: Real>(s: T, t: T, spec: &GaussianPacketSpec<T>, sigma: T) -> Complex<T> {
    let half = T::lit(0.5);
    let a = spec.width;
    let tau = sigma * t;
    let x = s - spec.s0;
    let denom = Complex::new(T::one(), a * tau);
    let numer = Complex::new(
        -half * a * x * x,
        spec.p0 * x - half * spec.p0 * spec.p0 * tau,
    );
    let prefactor = (Complex::new((a / T::PI()).sqrt(), T::zero()) / denom).sqrt();
    prefactor * (numer / denom).exp()
}

/// `psi(t) = F^{-1}[e^{-i sigma k^2 t / 2} F(psi_0)]` on the periodic grid.
///
/// Requires a power-of-two grid; the input must have decayed below
/// `1e-10` of its peak at both ends unless `policy` is `Periodic`.
pub fn fourier_propagate<T: SpectralReal>(
    initial: &WaveField<T>,
    t: T,
    sigma: T,
    policy: BoundaryPolicy,
) -> Result<WaveField<T>> {
    let grid = initial.grid();
    grid.require_power_of_two()?;
    if policy == BoundaryPolicy::RequireDecay {
        initial.check_boundary_decay(T::lit(BOUNDARY_DECAY_TOL))?;
    }
    if t == T::zero() {
        return Ok(initial.clone());
    }
    let n = grid.n_points();
    let k = wavenumbers(n, grid.period());
    let mut fft = Spectral::new(n);
    let mut buf = initial.values().to_vec();
    fft.forward(&mut buf);
    for (v, &kj) in buf.iter_mut().zip(&k) {
        *v *= Complex::from_polar(T::one(), -(T::lit(0.5) * sigma * kj * kj * t));
    }
    fft.inverse(&mut buf);
    WaveField::new(*grid, initial.time() + t, buf)
}

/// Position and wave-number moments of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectations<T> {
    pub mean_s: T,
    pub mean_k: T,
    pub delta_s: T,
    pub delta_k: T,
    /// Unnormalised `integral |psi|^2 ds`.
    pub norm: T,
}

impl<T: Real> Expectations<T> {
    pub fn uncertainty_product(&self) -> T {
        self.delta_s * self.delta_k
    }
}

/// Moments of the normalised densities `|psi(s)|^2` and `|psi_hat(k)|^2`.
pub fn expectations<T: SpectralReal>(field: &WaveField<T>) -> Result<Expectations<T>> {
    let grid = field.grid();
    grid.require_power_of_two()?;
    let density = field.density();
    let total: T = density.iter().fold(T::zero(), |a, &d| a + d);
    if !(total > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let nodes = grid.nodes();
    let (mean_s, var_s) = weighted_moments(&nodes, &density, total);

    let n = grid.n_points();
    let k = wavenumbers(n, grid.period());
    let mut spec = field.values().to_vec();
    Spectral::new(n).forward(&mut spec);
    let power: Vec<T> = spec.iter().map(|v| v.norm_sqr()).collect();
    let total_k = power.iter().fold(T::zero(), |a, &d| a + d);
    let (mean_k, var_k) = weighted_moments(&k, &power, total_k);

    Ok(Expectations {
        mean_s,
        mean_k,
        delta_s: var_s.max(T::zero()).sqrt(),
        delta_k: var_k.max(T::zero()).sqrt(),
        norm: grid.spacing() * total,
    })
}

fn weighted_moments<T: Real>(x: &[T], w: &[T], total: T) -> (T, T) {
    let mean = x.iter().zip(w).fold(T::zero(), |a, (&xi, &wi)| a + xi * wi) / total;
    let var = x.iter().zip(w).fold(T::zero(), |a, (&xi, &wi)| {
        a + (xi - mean) * (xi - mean) * wi
    }) / total;
    (mean, var)
}

/// Energy eigenstate `c1 e^{i sqrt(2E) s / sigma} + c2 e^{-i sqrt(2E) s / sigma}`
/// of `H = -(sigma^2/2) d^2/ds^2`.
pub fn energy_eigenstate<T: Real>(
    s: T,
    energy_k: T,
    c1: Complex<T>,
    c2: Complex<T>,
    sigma: T,
) -> Result<Complex<T>> {
    if energy_k < T::zero() {
        return Err(Error::param("energy_k", "must be non-negative"));
    }
    if !(sigma > T::zero()) {
        return Err(Error::param("sigma", "must be positive"));
    }
    let k = (T::lit(2.0) * energy_k).sqrt() / sigma;
    Ok(c1 * Complex::from_polar(T::one(), k * s) + c2 * Complex::from_polar(T::one(), -(k * s)))
}

/// Partial derivatives of the packet PDF `|psi(s, t)|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumGreeks<T> {
    /// `d|psi|^2 / ds`
    pub delta: T,
    /// `d|psi|^2 / d sigma`
    pub vega: T,
    /// `d|psi|^2 / dt`
    pub theta: T,
    /// `d^2|psi|^2 / ds^2`
    pub gamma: T,
}

/// Exact derivatives of `|psi|^2 = psi conj(psi)` by the product rule:
/// `d|psi|^2 = 2 Re(conj(psi) dpsi)` and
/// `d^2|psi|^2/ds^2 = 2 Re(conj(psi) psi_ss) + 2 |psi_s|^2`.
pub fn quantum_greeks<T: Real>(basis: &PlaneWaveBasis<T>, s: T, t: T) -> QuantumGreeks<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::lit(0.5);
    let i = Complex::new(T::zero(), T::one());
    let (mut psi, mut ds, mut dss, mut dsig, mut dt) = (zero, zero, zero, zero, zero);
    for w in &basis.waves {
        let e = plane_wave(s, t, w.c, w.k, basis.sigma);
        let k2 = w.k * w.k;
        psi += e;
        ds += e * i * w.k;
        dss -= e * k2;
        dsig -= e * i * (half * k2 * t);
        dt -= e * i * (half * k2 * basis.sigma);
    }
    let two = T::lit(2.0);
    let cross = |d: Complex<T>| two * (psi.conj() * d).re;
    QuantumGreeks {
        delta: cross(ds),
        vega: cross(dsig),
        theta: cross(dt),
        gamma: cross(dss) + two * ds.norm_sqr(),
    }
}

/// Published plane-wave fits to Black-Scholes curves.
pub mod published {
    use serde::Serialize;

    /// One published coefficient set, in model units.
    #[derive(Debug, Clone, PartialEq, Serialize)]
    pub struct PublishedPacketFit {
        pub name: &'static str,
        pub sigma_star: f64,
        pub t_star: f64,
        pub k: &'static [f64],
        pub c: &'static [f64],
        /// Reported conversion to Black-Scholes units, kept verbatim.
        pub scaling_note: &'static str,
    }

    impl PublishedPacketFit {
        pub fn n(&self) -> usize {
            self.k.len()
        }

        /// Parameter vector `[sigma, t, k_1..k_n, c_1..c_n]`.
        pub fn theta(&self) -> Vec<f64> {
            let mut v = vec![self.sigma_star, self.t_star];
            v.extend_from_slice(self.k);
            v.extend_from_slice(self.c);
            v
        }
    }

    /// Seven-wave fit of the put curve.
    pub const PUT_N7: PublishedPacketFit = PublishedPacketFit {
        name: "packet_put_n7",
        sigma_star: -0.0031891,
        t_star: -0.0031891,
        k: &[
            2.62771, 2.62777, 2.65402, 2.61118, 2.64104, 2.54737, 2.62778,
        ],
        c: &[
            1.26632, 1.26517, 2.74379, 1.35495, 1.59586, 0.263832, 1.26779,
        ],
        scaling_note: "sigma_BS = -94.0705 sigma*, t_BS = -31.3568 t*",
    };

    /// Three-wave fit of the call curve on s in [75, 140].
    pub const CALL_N3: PublishedPacketFit = PublishedPacketFit {
        name: "packet_call_n3",
        sigma_star: -11.9245,
        t_star: -11.9245,
        k: &[0.851858, 0.832409, 0.872061],
        c: &[2.9004, 2.72592, 2.93291],
        // The source omits the relation sign in the sigma conversion.
        scaling_note:
            "sigma_BS - 0.0251583 sigma* (relation sign missing in source), t = -0.00838609 t*",
    };
}
