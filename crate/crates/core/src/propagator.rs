//! Split-step Fourier integration, finite-difference PDE residuals and
//! conserved quantities. Used to check the closed forms independently.
//!
//! Each step is symmetric (Strang): half a nonlinear phase rotation, a full
//! exact linear step in Fourier space, then the other half of the nonlinear
//! rotation. The scheme is second order in `dt` and time reversible.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manakov::ManakovState;
use crate::market::{SpatialGrid, WaveField};
use crate::nls::BetaSource;
use crate::quantum::{BoundaryPolicy, BOUNDARY_DECAY_TOL};
use crate::real::{Real, SpectralReal};
use crate::spectral::{derivative, wavenumbers, Spectral};

/// Bound on `dt * D * k_max^2`, with `D` the dispersion coefficient and
/// `k_max = pi / ds`.
pub const STEP_LIMIT: f64 = 0.5;

/// Nonlinearity used by the evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaProfile<T> {
    Constant(T),
    /// `beta(s_i)` at every grid node.
    Sampled(Vec<T>),
}

impl<T: Real> BetaProfile<T> {
    /// Samples a potential on the grid; constants stay constant.
    pub fn from_source(source: &BetaSource<T>, grid: &SpatialGrid<T>) -> Self {
        match source.constant() {
            Some(b) => BetaProfile::Constant(b),
            None => BetaProfile::Sampled(grid.nodes().into_iter().map(|s| source.at(s)).collect()),
        }
    }

    fn at(&self, i: usize) -> T {
        match self {
            BetaProfile::Constant(b) => *b,
            BetaProfile::Sampled(v) => v[i],
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            BetaProfile::Constant(b) if !b.is_finite() => {
                Err(Error::param("beta", "must be finite"))
            }
            BetaProfile::Sampled(v) if v.len() != n => Err(Error::Shape(format!(
                "{} beta samples for a {n}-node grid",
                v.len()
            ))),
            BetaProfile::Sampled(v) if v.iter().any(|b| !b.is_finite()) => {
                Err(Error::param("beta", "samples must be finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind<T> {
    /// `i sigma psi_t = -(sigma^2/2) psi_ss`.
    FreeSchrodinger { sigma: T },
    /// `i psi_t = -(sigma/2) psi_ss - beta |psi|^2 psi`.
    Nls { sigma: T, beta: BetaProfile<T> },
    /// `i u_t = -(1/2) u_ss - beta (|u|^2 + |v|^2) u`, same for `v`.
    Manakov { beta: BetaProfile<T> },
}

impl<T: Real> EquationKind<T> {
    /// Coefficient `D` of the linear flow `psi_t = i D psi_ss`.
    pub fn dispersion(&self) -> T {
        match self {
            EquationKind::FreeSchrodinger { sigma } | EquationKind::Nls { sigma, .. } => {
                T::lit(0.5) * *sigma
            }
            EquationKind::Manakov { .. } => T::lit(0.5),
        }
    }

    fn beta(&self) -> Option<&BetaProfile<T>> {
        match self {
            EquationKind::FreeSchrodinger { .. } => None,
            EquationKind::Nls { beta, .. } | EquationKind::Manakov { beta } => Some(beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec<T> {
    pub equation: EquationKind<T>,
    pub dt: T,
    pub t_final: T,
    /// Record a frame every this many steps; the last step is always kept.
    pub record_every: usize,
    #[serde(default)]
    pub boundary: BoundaryPolicy,
    #[serde(default)]
    pub direction: Direction,
}

impl<T: Real> EvolutionSpec<T> {
    pub fn new(equation: EquationKind<T>, dt: T, t_final: T) -> Self {
        Self {
            equation,
            dt,
            t_final,
            record_every: usize::MAX,
            boundary: BoundaryPolicy::RequireDecay,
            direction: Direction::Forward,
        }
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub fn boundary(mut self, policy: BoundaryPolicy) -> Self {
        self.boundary = policy;
        self
    }

    /// Same run backwards in time.
    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.direction = match self.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        };
        r
    }

    /// Number of steps and the step actually taken, `t_final / n_steps`.
    pub fn steps(&self) -> (usize, T) {
        if self.t_final == T::zero() {
            return (0, self.dt);
        }
        let raw = (self.t_final / self.dt).to_f64().unwrap_or(f64::INFINITY);
        let n = ((raw - 1e-9).ceil() as usize).max(1);
        (n, self.t_final / T::count(n))
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        if !(self.t_final >= T::zero() && self.t_final.is_finite()) {
            return Err(Error::param("t_final", "must be non-negative"));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionState<T> {
    Scalar(WaveField<T>),
    Coupled(ManakovState<T>),
}

impl<T: Real> EvolutionState<T> {
    pub fn grid(&self) -> &SpatialGrid<T> {
        match self {
            EvolutionState::Scalar(f) => f.grid(),
            EvolutionState::Coupled(m) => m.grid(),
        }
    }

    pub fn time(&self) -> T {
        match self {
            EvolutionState::Scalar(f) => f.time(),
            EvolutionState::Coupled(m) => m.time(),
        }
    }

    pub fn components(&self) -> Vec<&WaveField<T>> {
        match self {
            EvolutionState::Scalar(f) => vec![f],
            EvolutionState::Coupled(m) => vec![m.sigma_field(), m.psi_field()],
        }
    }

    /// Sum of `|component|^2` at each node.
    pub fn density(&self) -> Vec<T> {
        match self {
            EvolutionState::Scalar(f) => f.density(),
            EvolutionState::Coupled(m) => m.total_density(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.components()
            .iter()
            .zip(other.components())
            .fold(T::zero(), |acc, (a, b)| acc.max(a.max_abs_diff(b)))
    }

    pub fn as_scalar(&self) -> Option<&WaveField<T>> {
        match self {
            EvolutionState::Scalar(f) => Some(f),
            EvolutionState::Coupled(_) => None,
        }
    }

    pub fn as_coupled(&self) -> Option<&ManakovState<T>> {
        match self {
            EvolutionState::Coupled(m) => Some(m),
            EvolutionState::Scalar(_) => None,
        }
    }
}

impl<T> From<WaveField<T>> for EvolutionState<T> {
    fn from(f: WaveField<T>) -> Self {
        EvolutionState::Scalar(f)
    }
}

impl<T> From<ManakovState<T>> for EvolutionState<T> {
    fn from(m: ManakovState<T>) -> Self {
        EvolutionState::Coupled(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub step: usize,
    pub state: EvolutionState<T>,
}

impl<T: Real> Frame<T> {
    pub fn time(&self) -> T {
        self.state.time()
    }
}

/// Evolves `initial` under `spec` and returns the recorded frames, the
/// initial state first.
pub fn split_step_evolve<T: SpectralReal>(
    initial: impl Into<EvolutionState<T>>,
    spec: &EvolutionSpec<T>,
) -> Result<Vec<Frame<T>>> {
    let initial = initial.into();
    spec.validate()?;
    let grid = *initial.grid();
    grid.require_power_of_two()?;
    let n = grid.n_points();

    match (&spec.equation, &initial) {
        (EquationKind::Manakov { .. }, EvolutionState::Scalar(_)) => {
            return Err(Error::Shape(
                "the coupled system needs two components".into(),
            ))
        }
        (EquationKind::Manakov { .. }, EvolutionState::Coupled(_)) => {}
        (_, EvolutionState::Coupled(_)) => {
            return Err(Error::Shape("scalar equation given two components".into()))
        }
        _ => {}
    }
    if let Some(beta) = spec.equation.beta() {
        beta.check(n)?;
    }
    if let EquationKind::FreeSchrodinger { sigma } | EquationKind::Nls { sigma, .. } =
        &spec.equation
    {
        if !sigma.is_finite() || *sigma == T::zero() {
            return Err(Error::param("sigma", "must be finite and non-zero"));
        }
    }

    if spec.boundary == BoundaryPolicy::RequireDecay {
        for c in initial.components() {
            c.check_boundary_decay(T::lit(BOUNDARY_DECAY_TOL))?;
        }
    }
    let k_max = T::PI() / grid.spacing();
    let stiffness = spec.dt * spec.equation.dispersion().abs() * k_max * k_max;
    if !(stiffness < T::lit(STEP_LIMIT)) {
        return Err(Error::StepTooLarge {
            value: stiffness.to_f64().unwrap_or(f64::NAN),
            limit: STEP_LIMIT,
        });
    }

    let (n_steps, dt) = spec.steps();
    let h = match spec.direction {
        Direction::Forward => dt,
        Direction::Backward => -dt,
    };
    let half = T::lit(0.5) * h;
    let d = spec.equation.dispersion();
    let linear: Vec<Complex<T>> = wavenumbers(n, grid.period())
        .into_iter()
        .map(|k| Complex::from_polar(T::one(), -(d * k * k * h)))
        .collect();

    let mut fields: Vec<Vec<Complex<T>>> = initial
        .components()
        .iter()
        .map(|f| f.values().to_vec())
        .collect();
    let t0 = initial.time();
    let mut fft = Spectral::new(n);
    let mut frames = vec![Frame {
        step: 0,
        state: initial.clone(),
    }];

    for step in 1..=n_steps {
        if let Some(beta) = spec.equation.beta() {
            nonlinear_phase(&mut fields, beta, half);
        }
        for f in fields.iter_mut() {
            fft.forward(f);
            for (v, &p) in f.iter_mut().zip(&linear) {
                *v *= p;
            }
            fft.inverse(f);
        }
        if let Some(beta) = spec.equation.beta() {
            nonlinear_phase(&mut fields, beta, half);
        }

        if step % spec.record_every == 0 || step == n_steps {
            let t = if step == n_steps {
                t0 + match spec.direction {
                    Direction::Forward => spec.t_final,
                    Direction::Backward => -spec.t_final,
                }
            } else {
                t0 + T::count(step) * h
            };
            if let Some(bad) = fields
                .iter()
                .flatten()
                .position(|v| !(v.re.is_finite() && v.im.is_finite()))
            {
                return Err(Error::NonFinite(format!(
                    "split-step field at step {step} (t = {t}), flat index {bad}"
                )));
            }
            frames.push(Frame {
                step,
                state: rebuild(&initial, t, &fields)?,
            });
        }
    }
    Ok(frames)
}

/// `psi <- psi e^{i beta P dt}` with `P` the total power at each node.
fn nonlinear_phase<T: Real>(fields: &mut [Vec<Complex<T>>], beta: &BetaProfile<T>, dt: T) {
    let n = fields[0].len();
    for i in 0..n {
        let power = fields
            .iter()
            .fold(T::zero(), |acc, f| acc + f[i].norm_sqr());
        let rot = Complex::from_polar(T::one(), beta.at(i) * power * dt);
        for f in fields.iter_mut() {
            f[i] *= rot;
        }
    }
}

fn rebuild<T: Real>(
    template: &EvolutionState<T>,
    t: T,
    fields: &[Vec<Complex<T>>],
) -> Result<EvolutionState<T>> {
    Ok(match template {
        EvolutionState::Scalar(f) => EvolutionState::Scalar(f.with_values(t, fields[0].clone())),
        EvolutionState::Coupled(m) => EvolutionState::Coupled(ManakovState::new(
            m.sigma_field().with_values(t, fields[0].clone()),
            m.psi_field().with_values(t, fields[1].clone()),
        )?),
    })
}

/// Uniform `(t, s)` lattice of samples `u(t_j, s_i)`, stored row by row in
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface<T> {
    pub grid: SpatialGrid<T>,
    pub t0: T,
    pub dt: T,
    pub n_times: usize,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> Surface<T> {
    pub fn new(
        grid: SpatialGrid<T>,
        t0: T,
        dt: T,
        n_times: usize,
        values: Vec<Complex<T>>,
    ) -> Result<Self> {
        if values.len() != grid.n_points() * n_times {
            return Err(Error::Shape(format!(
                "{} samples for a {}x{} lattice",
                values.len(),
                n_times,
                grid.n_points()
            )));
        }
        if !(dt > T::zero()) {
            return Err(Error::param("dt", "must be positive"));
        }
        Ok(Self {
            grid,
            t0,
            dt,
            n_times,
            values,
        })
    }

    fn at(&self, j: usize, i: usize) -> Complex<T> {
        self.values[j * self.grid.n_points() + i]
    }

    pub fn time(&self, j: usize) -> T {
        self.t0 + T::count(j) * self.dt
    }
}

/// Samples `f(s, t)` on `n_times` times `t0, t0 + dt, ...` and the nodes of `grid`.
pub fn sample_surface<T: Real>(
    grid: SpatialGrid<T>,
    t0: T,
    dt: T,
    n_times: usize,
    f: impl Fn(T, T) -> Complex<T>,
) -> Result<Surface<T>> {
    let nodes = grid.nodes();
    let mut values = Vec::with_capacity(n_times * nodes.len());
    for j in 0..n_times {
        let t = t0 + T::count(j) * dt;
        values.extend(nodes.iter().map(|&s| f(s, t)));
    }
    Surface::new(grid, t0, dt, n_times, values)
}

/// Equations available to [`pde_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualEquation<T> {
    /// `u_t + (1/2)(sigma s)^2 u_ss + r s u_s - r u` for a price surface
    /// indexed by calendar time.
    BlackScholes { sigma: T, rate: T },
    /// `i psi_t + (sigma/2) psi_ss + beta |psi|^2 psi`.
    Nls { sigma: T, beta: T },
    /// `i sigma psi_t + (sigma^2/2) psi_ss`.
    FreeSchrodinger { sigma: T },
    /// `i u_t + (1/2) u_ss + beta (|u|^2 + |v|^2) u`, for both components.
    Manakov { beta: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms<T> {
    pub linf: T,
    /// `sqrt(ds dt sum |R|^2)` over interior nodes.
    pub l2: T,
}

/// Residual of `equation` on sampled surfaces, from second-order central
/// differences at interior nodes. The coupled system takes two surfaces,
/// every other equation one.
pub fn pde_residual<T: Real>(
    surfaces: &[&Surface<T>],
    equation: ResidualEquation<T>,
) -> Result<ResidualNorms<T>> {
    let expected = if matches!(equation, ResidualEquation::Manakov { .. }) {
        2
    } else {
        1
    };
    if surfaces.len() != expected {
        return Err(Error::Shape(format!(
            "{expected} surface(s) expected, got {}",
            surfaces.len()
        )));
    }
    let first = surfaces[0];
    if surfaces.iter().any(|s| {
        s.grid != first.grid || s.t0 != first.t0 || s.dt != first.dt || s.n_times != first.n_times
    }) {
        return Err(Error::Shape(
            "surfaces sampled on different lattices".into(),
        ));
    }
    let (nt, ns) = (first.n_times, first.grid.n_points());
    if nt < 3 {
        return Err(Error::LatticeTooSmall {
            axis: "t",
            needed: 3,
            got: nt,
        });
    }
    if ns < 3 {
        return Err(Error::LatticeTooSmall {
            axis: "s",
            needed: 3,
            got: ns,
        });
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let hs = first.grid.spacing();
    let ht = first.dt;
    let i_unit = Complex::new(T::zero(), T::one());

    let mut linf = T::zero();
    let mut sum_sq = T::zero();
    for j in 1..nt - 1 {
        for i in 1..ns - 1 {
            let diffs = |u: &Surface<T>| {
                let c = u.at(j, i);
                let ut = (u.at(j + 1, i) - u.at(j - 1, i)) / (two * ht);
                let us = (u.at(j, i + 1) - u.at(j, i - 1)) / (two * hs);
                let uss = (u.at(j, i + 1) - c * two + u.at(j, i - 1)) / (hs * hs);
                (c, ut, us, uss)
            };
            let mut record = |r: Complex<T>| {
                let a = r.norm();
                linf = linf.max(a);
                sum_sq += a * a;
            };
            match equation {
                ResidualEquation::BlackScholes { sigma, rate } => {
                    let (u, ut, us, uss) = diffs(first);
                    let s = first.grid.node(i);
                    record(ut + uss * (half * sigma * sigma * s * s) + us * (rate * s) - u * rate);
                }
                ResidualEquation::Nls { sigma, beta } => {
                    let (u, ut, _, uss) = diffs(first);
                    record(i_unit * ut + uss * (half * sigma) + u * (beta * u.norm_sqr()));
                }
                ResidualEquation::FreeSchrodinger { sigma } => {
                    let (_, ut, _, uss) = diffs(first);
                    record(i_unit * ut * sigma + uss * (half * sigma * sigma));
                }
                ResidualEquation::Manakov { beta } => {
                    let a = diffs(surfaces[0]);
                    let b = diffs(surfaces[1]);
                    let power = a.0.norm_sqr() + b.0.norm_sqr();
                    for (u, ut, _, uss) in [a, b] {
                        record(i_unit * ut + uss * half + u * (beta * power));
                    }
                }
            }
        }
    }
    Ok(ResidualNorms {
        linf,
        l2: (hs * ht * sum_sq).sqrt(),
    })
}

/// Invariants of one recorded frame. Drifts are relative to the first
/// frame (absolute when the first value is zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport<T> {
    pub time: T,
    /// `integral sum |psi|^2 ds` over all components.
    pub norm: T,
    /// `Im integral sum conj(psi) psi_s ds`.
    pub momentum: T,
    /// Hamiltonian of the equation.
    pub energy: T,
    pub norm_drift: T,
    pub momentum_drift: T,
    pub energy_drift: T,
}

/// Norm, momentum and energy of every frame, with spectral derivatives.
///
/// Energies: `(sigma^2/2) int |psi_s|^2` (free), `int (sigma/2)|psi_s|^2 - (beta/2)|psi|^4` (NLS),
/// `int (1/2) sum |u_s|^2 - (beta/2) P^2` (coupled, `P` the total power).
pub fn conserved_quantities<T: SpectralReal>(
    frames: &[Frame<T>],
    equation: &EquationKind<T>,
) -> Result<Vec<ConservedReport<T>>> {
    let first = frames
        .first()
        .ok_or_else(|| Error::param("frames", "at least one frame required"))?;
    let grid = *first.state.grid();
    grid.require_power_of_two()?;
    let n = grid.n_points();
    if let Some(beta) = equation.beta() {
        beta.check(n)?;
    }
    let k = wavenumbers(n, grid.period());
    let mut fft = Spectral::new(n);
    let h = grid.spacing();
    let half = T::lit(0.5);

    let mut raw = Vec::with_capacity(frames.len());
    for frame in frames {
        let comps = frame.state.components();
        let mut norm = T::zero();
        let mut momentum = T::zero();
        let mut kinetic = T::zero();
        for c in &comps {
            let d = derivative(&mut fft, c.values(), &k);
            for (v, dv) in c.values().iter().zip(&d) {
                norm += v.norm_sqr();
                momentum += (v.conj() * dv).im;
                kinetic += dv.norm_sqr();
            }
        }
        let density = frame.state.density();
        let quartic = |beta: &BetaProfile<T>| {
            density
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (i, p)| acc + beta.at(i) * *p * *p)
        };
        let energy = match equation {
            EquationKind::FreeSchrodinger { sigma } => half * *sigma * *sigma * kinetic,
            EquationKind::Nls { sigma, beta } => half * *sigma * kinetic - half * quartic(beta),
            EquationKind::Manakov { beta } => half * kinetic - half * quartic(beta),
        };
        raw.push((frame.time(), h * norm, h * momentum, h * energy));
    }

    let drift = |x: T, x0: T| {
        if x0 == T::zero() {
            (x - x0).abs()
        } else {
            ((x - x0) / x0).abs()
        }
    };
    let (_, n0, p0, e0) = raw[0];
    Ok(raw
        .into_iter()
        .map(|(time, norm, momentum, energy)| ConservedReport {
            time,
            norm,
            momentum,
            energy,
            norm_drift: drift(norm, n0),
            momentum_drift: drift(momentum, p0),
            energy_drift: drift(energy, e0),
        })
        .collect())
}

/// Largest relative drift of a quantity over a report sequence.
pub fn max_drift<T: Real>(
    reports: &[ConservedReport<T>],
    pick: impl Fn(&ConservedReport<T>) -> T,
) -> T {
    reports.iter().fold(T::zero(), |acc, r| acc.max(pick(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fourier_propagate, gaussian_packet, plane_wave, GaussianPacketSpec};

    fn gaussian(grid: SpatialGrid<f64>) -> WaveField<f64> {
        let spec = GaussianPacketSpec::new(1.0, 0.0, 1.0).unwrap();
        WaveField::from_fn(grid, 0.0, |s| gaussian_packet(s, 0.0, &spec, 1.0)).unwrap()
    }

    #[test]
    fn zero_duration_returns_input() {
        let grid = SpatialGrid::periodic(-20.0, 40.0, 256).unwrap();
        let f = gaussian(grid);
        let spec = EvolutionSpec::new(EquationKind::FreeSchrodinger { sigma: 1.0 }, 1e-3, 0.0);
        let frames = split_step_evolve(f.clone(), &spec).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].state, EvolutionState::Scalar(f));
    }

    #[test]
    fn plane_wave_rotates_exactly_without_nonlinearity() {
        let n = 64;
        let period = 2.0 * std::f64::consts::PI;
        let grid = SpatialGrid::periodic(0.0, period, n).unwrap();
        let init = WaveField::from_fn(grid, 0.0, |s| plane_wave(s, 0.0, 1.0, 3.0, 0.4)).unwrap();
        let spec = EvolutionSpec::new(
            EquationKind::Nls {
                sigma: 0.4,
                beta: BetaProfile::Constant(0.0),
            },
            1e-3,
            0.5,
        )
        .boundary(BoundaryPolicy::Periodic);
        let frames = split_step_evolve(init, &spec).unwrap();
        let last = frames.last().unwrap().state.as_scalar().unwrap();
        let exact = WaveField::from_fn(grid, 0.5, |s| plane_wave(s, 0.5, 1.0, 3.0, 0.4)).unwrap();
        assert!(last.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn rejects_large_steps_and_bad_grids() {
        let grid = SpatialGrid::periodic(-20.0, 40.0, 256).unwrap();
        let f = gaussian(grid);
        let spec = EvolutionSpec::new(EquationKind::FreeSchrodinger { sigma: 1.0 }, 0.1, 1.0);
        assert!(matches!(
            split_step_evolve(f, &spec),
            Err(Error::StepTooLarge { .. })
        ));

        let odd = SpatialGrid::periodic(-20.0, 40.0, 100).unwrap();
        let spec = EvolutionSpec::new(EquationKind::FreeSchrodinger { sigma: 1.0 }, 1e-3, 1.0);
        assert!(matches!(
            split_step_evolve(gaussian(odd), &spec),
            Err(Error::InvalidGrid(_))
        ));

        let narrow = SpatialGrid::periodic(-2.0, 4.0, 64).unwrap();
        assert!(matches!(
            split_step_evolve(gaussian(narrow), &spec),
            Err(Error::BoundaryDecay { .. })
        ));
    }

    #[test]
    fn linear_limit_matches_fourier_propagation() {
        let grid = SpatialGrid::periodic(-32.0, 64.0, 512).unwrap();
        let f = gaussian(grid);
        let spec = EvolutionSpec::new(
            EquationKind::Nls {
                sigma: 0.8,
                beta: BetaProfile::Constant(0.0),
            },
            1e-3,
            0.7,
        );
        let frames = split_step_evolve(f.clone(), &spec).unwrap();
        let direct = fourier_propagate(&f, 0.7, 0.8, BoundaryPolicy::RequireDecay).unwrap();
        assert!(
            frames
                .last()
                .unwrap()
                .state
                .as_scalar()
                .unwrap()
                .max_abs_diff(&direct)
                < 1e-12
        );
    }

    #[test]
    fn frames_follow_record_interval() {
        let grid = SpatialGrid::periodic(-20.0, 40.0, 256).unwrap();
        let spec = EvolutionSpec::new(EquationKind::FreeSchrodinger { sigma: 1.0 }, 1e-3, 0.01)
            .record_every(3);
        let frames = split_step_evolve(gaussian(grid), &spec).unwrap();
        let steps: Vec<usize> = frames.iter().map(|f| f.step).collect();
        assert_eq!(steps, vec![0, 3, 6, 9, 10]);
        assert!((frames.last().unwrap().time() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_surface_has_zero_residual() {
        let grid = SpatialGrid::new(1.0, 2.0, 9).unwrap();
        let s = sample_surface(grid, 0.0, 0.1, 5, |_, _| Complex::new(0.0, 0.0)).unwrap();
        for eq in [
            ResidualEquation::BlackScholes {
                sigma: 0.2,
                rate: 0.05,
            },
            ResidualEquation::Nls {
                sigma: 0.2,
                beta: 1.0,
            },
            ResidualEquation::FreeSchrodinger { sigma: 0.2 },
        ] {
            let r = pde_residual(&[&s], eq).unwrap();
            assert_eq!((r.linf, r.l2), (0.0, 0.0));
        }
        let thin = sample_surface(grid, 0.0, 0.1, 2, |_, _| Complex::new(0.0, 0.0)).unwrap();
        assert!(matches!(
            pde_residual(&[&thin], ResidualEquation::FreeSchrodinger { sigma: 1.0 }),
            Err(Error::LatticeTooSmall { axis: "t", .. })
        ));
        assert!(pde_residual(&[&s], ResidualEquation::Manakov { beta: 1.0 }).is_err());
    }

    #[test]
    fn single_frame_has_no_drift() {
        let grid = SpatialGrid::periodic(-20.0, 40.0, 256).unwrap();
        let frame = Frame {
            step: 0,
            state: EvolutionState::Scalar(gaussian(grid)),
        };
        let r =
            conserved_quantities(&[frame], &EquationKind::FreeSchrodinger { sigma: 1.0 }).unwrap();
        assert_eq!(
            (r[0].norm_drift, r[0].momentum_drift, r[0].energy_drift),
            (0.0, 0.0, 0.0)
        );
        assert!((r[0].norm - 1.0).abs() < 1e-12);
        // <k> = p0 = 1 for the unit Gaussian
        assert!((r[0].momentum - 1.0).abs() < 1e-10);
        assert!(
            conserved_quantities::<f64>(&[], &EquationKind::FreeSchrodinger { sigma: 1.0 })
                .is_err()
        );
    }
}
