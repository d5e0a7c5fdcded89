//! Coupled volatility / option-price waves.
//!
//! The model system is
//! `i sigma_t = -(1/2) sigma_ss - beta (|sigma|^2 + |psi|^2) sigma` and the
//! same for `psi`. The textbook Manakov vector soliton
//! `2b c sech(2b(s + 4at)) e^{-2i(2a^2 t + a s - 2b^2 t)}` solves
//! `i u_t + u_ss + 2(|u|^2 + |v|^2) u = 0`; [`ManakovSystem::soliton`] maps it
//! onto the model by `psi(s, t) = u(s, t/2) / sqrt(beta)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{SpatialGrid, WaveField};
use crate::real::{tiny, Real};

/// Bright vector soliton parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSoliton<T>", into = "RawSoliton<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct SolitonSpec<T> {
    a: T,
    b: T,
    c: [Complex<T>; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoliton<T> {
    a: T,
    b: T,
    c: [Complex<T>; 2],
}

impl<T: Real> TryFrom<RawSoliton<T>> for SolitonSpec<T> {
    type Error = Error;

    fn try_from(r: RawSoliton<T>) -> Result<Self> {
        SolitonSpec::new(r.a, r.b, r.c)
    }
}

impl<T> From<SolitonSpec<T>> for RawSoliton<T> {
    fn from(s: SolitonSpec<T>) -> Self {
        RawSoliton {
            a: s.a,
            b: s.b,
            c: s.c,
        }
    }
}

impl<T: Real> SolitonSpec<T> {
    pub fn new(a: T, b: T, c: [Complex<T>; 2]) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::param("a, b", "must be finite"));
        }
        if b == T::zero() {
            return Err(Error::param("b", "must be non-zero"));
        }
        let norm = c[0].norm_sqr() + c[1].norm_sqr();
        if !((norm - T::one()).abs() <= tiny::<T>(1e-12)) {
            return Err(Error::param(
                "c",
                format!("polarization must be a unit vector, |c|^2 = {norm}"),
            ));
        }
        Ok(Self { a, b, c })
    }

    /// Real polarization `(c1, c2)`.
    pub fn with_real_polarization(a: T, b: T, c1: T, c2: T) -> Result<Self> {
        Self::new(
            a,
            b,
            [Complex::new(c1, T::zero()), Complex::new(c2, T::zero())],
        )
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn c(&self) -> [Complex<T>; 2] {
        self.c
    }
}

/// The Manakov vector soliton `2b c sech(2b(s + 4at)) e^{-2i(2a^2 t + a s - 2b^2 t)}`
/// of `i u_t + u_ss + 2|u|^2 u = 0`.
pub fn manakov_soliton<T: Real>(s: T, t: T, spec: &SolitonSpec<T>) -> (Complex<T>, Complex<T>) {
    let two = T::lit(2.0);
    let (a, b) = (spec.a, spec.b);
    let envelope = two * b * (two * b * (s + T::lit(4.0) * a * t)).cosh().recip();
    let phase = -two * (two * a * a * t + a * s - two * b * b * t);
    let carrier = Complex::from_polar(envelope, phase);
    (carrier * spec.c[0], carrier * spec.c[1])
}

/// Total power `|sigma|^2 + |psi|^2` of the vector soliton.
pub fn soliton_power<T: Real>(s: T, t: T, spec: &SolitonSpec<T>) -> T {
    let (u, v) = manakov_soliton(s, t, spec);
    u.norm_sqr() + v.norm_sqr()
}

/// Coupled model with constant nonlinearity `beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManakovSystem<T> {
    pub beta: T,
}

impl<T: Real> ManakovSystem<T> {
    pub fn new(beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::param("beta", "must be positive"));
        }
        Ok(Self { beta })
    }

    /// Vector soliton of the model system. Its envelope moves with velocity
    /// `-2a` and has width `1 / (2b)`.
    pub fn soliton(&self, s: T, t: T, spec: &SolitonSpec<T>) -> (Complex<T>, Complex<T>) {
        let scale = self.beta.sqrt().recip();
        let (u, v) = manakov_soliton(s, T::lit(0.5) * t, spec);
        (u * scale, v * scale)
    }

    pub fn state(
        &self,
        grid: SpatialGrid<T>,
        t: T,
        spec: &SolitonSpec<T>,
    ) -> Result<ManakovState<T>> {
        let pairs: Vec<_> = grid
            .nodes()
            .into_iter()
            .map(|s| self.soliton(s, t, spec))
            .collect();
        ManakovState::from_pairs(grid, t, &pairs)
    }
}

/// Volatility and option-price waves on one grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ManakovState<T> {
    sigma_field: WaveField<T>,
    psi_field: WaveField<T>,
}

impl<T: Real> ManakovState<T> {
    pub fn new(sigma_field: WaveField<T>, psi_field: WaveField<T>) -> Result<Self> {
        if sigma_field.grid() != psi_field.grid() {
            return Err(Error::Shape("components live on different grids".into()));
        }
        if sigma_field.time() != psi_field.time() {
            return Err(Error::Shape("components are at different times".into()));
        }
        Ok(Self {
            sigma_field,
            psi_field,
        })
    }

    fn from_pairs(grid: SpatialGrid<T>, t: T, pairs: &[(Complex<T>, Complex<T>)]) -> Result<Self> {
        Self::new(
            WaveField::new(grid, t, pairs.iter().map(|p| p.0).collect())?,
            WaveField::new(grid, t, pairs.iter().map(|p| p.1).collect())?,
        )
    }

    pub fn sigma_field(&self) -> &WaveField<T> {
        &self.sigma_field
    }

    pub fn psi_field(&self) -> &WaveField<T> {
        &self.psi_field
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        self.sigma_field.grid()
    }

    pub fn time(&self) -> T {
        self.sigma_field.time()
    }

    /// `|sigma|^2 + |psi|^2` at each node.
    pub fn total_density(&self) -> Vec<T> {
        self.sigma_field
            .values()
            .iter()
            .zip(self.psi_field.values())
            .map(|(u, v)| u.norm_sqr() + v.norm_sqr())
            .collect()
    }

    /// `integral (|sigma|^2 + |psi|^2) ds`.
    pub fn total_norm(&self) -> T {
        self.sigma_field.norm_sqr() + self.psi_field.norm_sqr()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.sigma_field
            .max_abs_diff(&other.sigma_field)
            .max(self.psi_field.max_abs_diff(&other.psi_field))
    }

    pub fn into_fields(self) -> (WaveField<T>, WaveField<T>) {
        (self.sigma_field, self.psi_field)
    }
}

/// Largest admissible cross power `integral sqrt(P_i P_j) ds` between two
/// superposed solitons.
pub const OVERLAP_THRESHOLD: f64 = 1e-8;

/// Sum of single solitons shifted to `offsets`, at `t = 0`.
///
/// Every pair must be separated enough that the cross power of their
/// envelopes stays below [`OVERLAP_THRESHOLD`].
pub fn collision_initial_condition<T: Real>(
    system: &ManakovSystem<T>,
    specs: &[SolitonSpec<T>],
    offsets: &[T],
    grid: SpatialGrid<T>,
) -> Result<ManakovState<T>> {
    if specs.is_empty() {
        return Err(Error::param("specs", "at least one soliton required"));
    }
    if specs.len() != offsets.len() {
        return Err(Error::Shape(format!(
            "{} solitons but {} offsets",
            specs.len(),
            offsets.len()
        )));
    }
    let nodes = grid.nodes();
    let parts: Vec<Vec<(Complex<T>, Complex<T>)>> = specs
        .iter()
        .zip(offsets)
        .map(|(spec, &x0)| {
            nodes
                .iter()
                .map(|&s| system.soliton(s - x0, T::zero(), spec))
                .collect()
        })
        .collect();
    let amplitude = |part: &[(Complex<T>, Complex<T>)]| -> Vec<T> {
        part.iter()
            .map(|(u, v)| (u.norm_sqr() + v.norm_sqr()).sqrt())
            .collect()
    };
    let amps: Vec<Vec<T>> = parts.iter().map(|p| amplitude(p)).collect();
    let h = grid.spacing();
    for i in 0..amps.len() {
        for j in i + 1..amps.len() {
            let overlap = h * amps[i]
                .iter()
                .zip(&amps[j])
                .fold(T::zero(), |acc, (x, y)| acc + *x * *y);
            if overlap >= T::lit(OVERLAP_THRESHOLD) {
                return Err(Error::Overlap {
                    first: i,
                    second: j,
                    overlap: overlap.to_f64().unwrap_or(f64::NAN),
                    threshold: OVERLAP_THRESHOLD,
                });
            }
        }
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut sum = vec![(zero, zero); nodes.len()];
    for part in &parts {
        for (acc, (u, v)) in sum.iter_mut().zip(part) {
            acc.0 += *u;
            acc.1 += *v;
        }
    }
    ManakovState::from_pairs(grid, T::zero(), &sum)
}

/// Number of disjoint runs of samples above `rel_level * max(values)`.
pub fn count_separated_peaks<T: Real>(values: &[T], rel_level: T) -> usize {
    let peak = values.iter().fold(T::zero(), |acc, &v| acc.max(v));
    if !(peak > T::zero()) {
        return 0;
    }
    let level = rel_level * peak;
    let mut count = 0;
    let mut inside = false;
    for &v in values {
        if v > level && !inside {
            count += 1;
        }
        inside = v > level;
    }
    count
}

/// Head-on collision of two orthogonally polarised solitons: `a = -/+ 1/2`,
/// `b = 1/2`, started at `s = -/+ 15` so they meet at the origin near
/// `t = 15` and separate again by `t = 30`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct CollisionScenario<T> {
    pub beta: T,
    pub specs: Vec<SolitonSpec<T>>,
    pub offsets: Vec<T>,
    pub s_min: T,
    pub period: T,
    pub n_points: usize,
    pub dt: T,
    pub t_final: T,
}

impl<T: Real> CollisionScenario<T> {
    pub fn standard() -> Self {
        let half = T::lit(0.5);
        Self {
            beta: T::one(),
            specs: vec![
                SolitonSpec::with_real_polarization(-half, half, T::one(), T::zero())
                    .expect("unit polarization"),
                SolitonSpec::with_real_polarization(half, half, T::zero(), T::one())
                    .expect("unit polarization"),
            ],
            offsets: vec![T::lit(-15.0), T::lit(15.0)],
            s_min: T::lit(-50.0),
            period: T::lit(100.0),
            n_points: 512,
            dt: T::lit(2.5e-3),
            t_final: T::lit(30.0),
        }
    }

    pub fn grid(&self) -> Result<SpatialGrid<T>> {
        SpatialGrid::periodic(self.s_min, self.period, self.n_points)
    }

    pub fn initial_state(&self) -> Result<ManakovState<T>> {
        collision_initial_condition(
            &ManakovSystem::new(self.beta)?,
            &self.specs,
            &self.offsets,
            self.grid()?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64, b: f64) -> SolitonSpec<f64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        SolitonSpec::with_real_polarization(a, b, r, r).unwrap()
    }

    #[test]
    fn value_at_origin() {
        let sp = SolitonSpec::with_real_polarization(0.3f64, 0.7, 0.6, 0.8).unwrap();
        let (u, v) = manakov_soliton(0.0, 0.0, &sp);
        assert!((u.norm() - 2.0 * 0.7 * 0.6).abs() < 1e-15);
        assert!((v.norm() - 2.0 * 0.7 * 0.8).abs() < 1e-15);
        assert!((soliton_power(0.0, 0.0, &sp) - 4.0 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn power_profile() {
        let sp = spec(0.25, 0.5);
        for &(s, t) in &[(0.3f64, 0.0), (-2.0, 1.5), (4.0, -0.7)] {
            let sech = 1.0 / (2.0 * 0.5 * (s + 4.0 * 0.25 * t)).cosh();
            assert!((soliton_power(s, t, &sp) - sech * sech).abs() < 1e-14);
        }
    }

    #[test]
    fn stationary_when_a_is_zero() {
        let sp = spec(0.0, 0.8);
        for &s in &[-1.0, 0.0, 0.6] {
            let a = manakov_soliton(s, 0.0, &sp).0.norm();
            let b = manakov_soliton(s, 3.7, &sp).0.norm();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_polarization() {
        assert!(SolitonSpec::with_real_polarization(0.1, 0.5, 1.0, 0.1).is_err());
        assert!(SolitonSpec::with_real_polarization(0.1, 0.0, 1.0, 0.0).is_err());
        let c = [Complex::new(0.0, 0.6), Complex::new(0.8, 0.0)];
        assert!(SolitonSpec::new(0.1, 0.5, c).is_ok());
        let json = r#"{"a":0.1,"b":0.5,"c":[[1.0,0.0],[0.5,0.0]]}"#;
        assert!(serde_json::from_str::<SolitonSpec<f64>>(json).is_err());
    }

    #[test]
    fn model_soliton_scaling() {
        let sys = ManakovSystem::new(4.0).unwrap();
        let sp = spec(0.25, 0.5);
        let (u, _) = sys.soliton(0.3, 2.0, &sp);
        let (w, _) = manakov_soliton(0.3, 1.0, &sp);
        assert!((u - w * 0.5).norm() < 1e-15);
        assert!(ManakovSystem::new(0.0).is_err());
    }

    #[test]
    fn single_spec_collision_is_the_soliton() {
        let sys = ManakovSystem::new(1.0).unwrap();
        let grid = SpatialGrid::periodic(-40.0, 80.0, 256).unwrap();
        let sp = spec(0.25, 0.5);
        let st = collision_initial_condition(&sys, &[sp], &[0.0], grid).unwrap();
        let direct = sys.state(grid, 0.0, &sp).unwrap();
        assert_eq!(st, direct);
    }

    #[test]
    fn separated_solitons_add_power() {
        let sys = ManakovSystem::new(1.0).unwrap();
        let grid = SpatialGrid::periodic(-50.0, 100.0, 1024).unwrap();
        let sc = CollisionScenario::<f64>::standard();
        let st = collision_initial_condition(&sys, &sc.specs, &sc.offsets, grid).unwrap();
        let single = |i: usize| {
            collision_initial_condition(&sys, &sc.specs[i..=i], &sc.offsets[i..=i], grid)
                .unwrap()
                .total_norm()
        };
        assert!((st.total_norm() - single(0) - single(1)).abs() < 1e-8);
        assert_eq!(count_separated_peaks(&st.total_density(), 0.5), 2);

        let close = collision_initial_condition(&sys, &sc.specs, &[-1.0, 1.0], grid);
        assert!(matches!(close, Err(Error::Overlap { .. })));
    }

    #[test]
    fn peak_counter() {
        assert_eq!(count_separated_peaks(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.5), 2);
        assert_eq!(count_separated_peaks(&[0.0, 1.0, 0.9, 1.0, 0.0], 0.5), 1);
        assert_eq!(count_separated_peaks(&[0.0f64; 5], 0.5), 0);
    }
}
