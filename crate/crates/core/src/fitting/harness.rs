//! Fits of wave-model densities to Black-Scholes price curves.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::lm::{
    finite_difference_jacobian, levenberg_marquardt, rmse, FitResult, LmOptions, Matrix, Objective,
};
use crate::black_scholes::{bs_curve, OptionKind};
use crate::error::{Error, Result};
use crate::market::{OptionParams, SpatialGrid};
use crate::nls::{
    spatial_pdf_blend, spatial_pdf_shock, BetaSource, BlendCoefficients, Branch, NlsParams,
    RadicandMode, WeightSet,
};
use crate::quantum::published::{self, PublishedPacketFit};
use crate::real::Real;
use crate::special::EllipticModulus;

/// Curve values on a set of prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target<T> {
    pub s: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> Target<T> {
    pub fn new(s: Vec<T>, values: Vec<T>) -> Result<Self> {
        if s.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} prices but {} values",
                s.len(),
                values.len()
            )));
        }
        if s.is_empty() {
            return Err(Error::Shape("empty target".into()));
        }
        if !(s.iter().chain(&values).all(|v| v.is_finite())) {
            return Err(Error::NonFinite("target curve".into()));
        }
        Ok(Self { s, values })
    }

    pub fn black_scholes(
        grid: &SpatialGrid<T>,
        params: &OptionParams<T>,
        kind: OptionKind,
    ) -> Result<Self> {
        Self::new(grid.nodes(), bs_curve(grid, params, kind)?)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Price window of the reproduction fits, `[75, 140]` with 128 nodes.
pub fn default_grid<T: Real>() -> SpatialGrid<T> {
    SpatialGrid::new(T::lit(75.0), T::lit(140.0), 128).expect("valid default grid")
}

fn max_normalized<T: Real>(v: &mut [T]) {
    let peak = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if peak > T::zero() {
        for x in v.iter_mut() {
            *x /= peak;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlsModel {
    /// `|sqrt(sigma/beta) tanh(s - sigma k t)|^2`
    Shock,
    /// `|sqrt(sigma/beta) (d1 tanh + d2 sech)(s - sigma k t)|^2`
    Blend,
}

/// Layout of an NLS fit: `theta = [w1, w2, w3 (per row)..., k, t, sigma, (d1, d2)]`
/// with the rate `r` of the potential held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsFitConfig<T> {
    pub model: NlsModel,
    pub n_rows: usize,
    pub rate: T,
    /// Divide model and target by their maxima before comparing.
    #[serde(default)]
    pub normalize: bool,
}

impl<T: Real> NlsFitConfig<T> {
    pub fn n_params(&self) -> usize {
        3 * self.n_rows
            + 3
            + match self.model {
                NlsModel::Shock => 0,
                NlsModel::Blend => 2,
            }
    }

    /// Offset of `k` in the parameter vector.
    pub fn k_index(&self) -> usize {
        3 * self.n_rows
    }

    fn params(&self, theta: &[T]) -> Result<NlsParams<T>> {
        let w = WeightSet::from_flat(&theta[..3 * self.n_rows])?;
        let i = self.k_index();
        Ok(NlsParams {
            // Fits may drive sigma through zero, so the positivity check of
            // `NlsParams::new` is skipped; only |sigma/beta| enters the density.
            sigma: theta[i + 2],
            wave_number: theta[i],
            modulus: EllipticModulus::new(T::one())?,
            beta: BetaSource::Adaptive {
                rate: self.rate,
                weights: w,
            },
            branch: Branch::Plus,
            radicand: RadicandMode::Magnitude,
        })
    }

    /// Model density at every price in `s`.
    pub fn curve(&self, s: &[T], theta: &[T]) -> Result<Vec<T>> {
        if theta.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "{} parameters given, layout needs {}",
                theta.len(),
                self.n_params()
            )));
        }
        let p = self.params(theta)?;
        let t = theta[self.k_index() + 1];
        let mut out = match self.model {
            NlsModel::Shock => s
                .iter()
                .map(|&x| spatial_pdf_shock(x, &p, t))
                .collect::<Result<Vec<_>>>()?,
            NlsModel::Blend => {
                let i = self.k_index();
                let d = BlendCoefficients::new(theta[i + 3], theta[i + 4])?;
                s.iter()
                    .map(|&x| spatial_pdf_blend(x, &p, t, d))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        if self.normalize {
            max_normalized(&mut out);
        }
        Ok(out)
    }
}

pub struct NlsObjective<'a, T> {
    pub target: &'a Target<T>,
    pub config: NlsFitConfig<T>,
    scaled_target: Vec<T>,
}

impl<'a, T: Real> NlsObjective<'a, T> {
    pub fn new(target: &'a Target<T>, config: NlsFitConfig<T>) -> Result<Self> {
        if config.n_rows == 0 {
            return Err(Error::param("n_rows", "at least one weight row"));
        }
        let mut scaled_target = target.values.clone();
        if config.normalize {
            max_normalized(&mut scaled_target);
        }
        Ok(Self {
            target,
            config,
            scaled_target,
        })
    }
}

impl<T: Real> Objective<T> for NlsObjective<'_, T> {
    fn n_params(&self) -> usize {
        self.config.n_params()
    }

    fn n_residuals(&self) -> usize {
        self.target.len()
    }

    fn residuals(&self, theta: &[T]) -> Result<Vec<T>> {
        let model = self.config.curve(&self.target.s, theta)?;
        Ok(model
            .iter()
            .zip(&self.scaled_target)
            .map(|(m, y)| *m - *y)
            .collect())
    }
}

/// Fits an NLS density to `target`; the Jacobian is by central differences.
pub fn fit_nls_to_bs<T: Real>(
    target: &Target<T>,
    config: NlsFitConfig<T>,
    theta0: &[T],
    opts: &LmOptions<T>,
) -> Result<FitResult<T>> {
    let obj = NlsObjective::new(target, config)?;
    levenberg_marquardt(&obj, theta0, opts)
}

/// `|sum_i c_i e^{i(k_i s - sigma k_i^2 t / 2)}|^2` with
/// `theta = [sigma, t, k_1..k_n, c_1..c_n]`.
pub fn packet_curve<T: Real>(s: &[T], theta: &[T]) -> Result<Vec<T>> {
    if theta.len() < 4 || !theta.len().is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "{} is not a packet parameter count",
            theta.len()
        )));
    }
    Ok(s.iter()
        .map(|&x| packet_terms(x, theta).0.norm_sqr())
        .collect())
}

/// `psi` and the plane-wave terms `c_i e^{i phi_i}` at one price.
fn packet_terms<T: Real>(s: T, theta: &[T]) -> (Complex<T>, Vec<Complex<T>>) {
    let n = (theta.len() - 2) / 2;
    let (sigma, t) = (theta[0], theta[1]);
    let half = T::lit(0.5);
    let terms: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let k = theta[2 + i];
            Complex::from_polar(theta[2 + n + i], k * s - half * sigma * k * k * t)
        })
        .collect();
    let psi = terms
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + *b);
    (psi, terms)
}

pub struct PacketObjective<'a, T> {
    pub target: &'a Target<T>,
    pub n: usize,
    pub normalize: bool,
    scaled_target: Vec<T>,
}

impl<'a, T: Real> PacketObjective<'a, T> {
    pub fn new(target: &'a Target<T>, n: usize, normalize: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "at least one plane wave"));
        }
        let mut scaled_target = target.values.clone();
        if normalize {
            max_normalized(&mut scaled_target);
        }
        Ok(Self {
            target,
            n,
            normalize,
            scaled_target,
        })
    }
}

impl<T: Real> Objective<T> for PacketObjective<'_, T> {
    fn n_params(&self) -> usize {
        2 + 2 * self.n
    }

    fn n_residuals(&self) -> usize {
        self.target.len()
    }

    fn residuals(&self, theta: &[T]) -> Result<Vec<T>> {
        let mut model = packet_curve(&self.target.s, theta)?;
        if self.normalize {
            max_normalized(&mut model);
        }
        Ok(model
            .iter()
            .zip(&self.scaled_target)
            .map(|(m, y)| *m - *y)
            .collect())
    }

    /// Exact derivatives of `|psi|^2` by the product rule,
    /// `d|psi|^2 = 2 Re(conj(psi) dpsi)`.
    fn jacobian(&self, theta: &[T]) -> Result<Matrix<T>> {
        if self.normalize {
            return finite_difference_jacobian(self, theta);
        }
        let n = self.n;
        let (sigma, t) = (theta[0], theta[1]);
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let i_unit = Complex::new(T::zero(), T::one());
        let mut jac = Matrix::zeros(self.target.len(), 2 + 2 * n);
        for (row, &s) in self.target.s.iter().enumerate() {
            let (psi, terms) = packet_terms(s, theta);
            let conj = psi.conj();
            let re = |d: Complex<T>| two * (conj * d).re;
            let out = jac.row_mut(row);
            let mut d_sigma = Complex::new(T::zero(), T::zero());
            let mut d_t = d_sigma;
            for i in 0..n {
                let k = theta[2 + i];
                let e = terms[i];
                d_sigma -= e * i_unit * (half * k * k * t);
                d_t -= e * i_unit * (half * k * k * sigma);
                out[2 + i] = re(e * i_unit * (s - sigma * k * t));
                out[2 + n + i] = re(Complex::from_polar(
                    T::one(),
                    k * s - half * sigma * k * k * t,
                ));
            }
            out[0] = re(d_sigma);
            out[1] = re(d_t);
        }
        Ok(jac)
    }
}

pub fn fit_packet_to_bs<T: Real>(
    target: &Target<T>,
    n: usize,
    theta0: &[T],
    opts: &LmOptions<T>,
) -> Result<FitResult<T>> {
    let obj = PacketObjective::new(target, n, false)?;
    levenberg_marquardt(&obj, theta0, opts)
}

/// Published-fit reproduction cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReproCase {
    NlsCall,
    NlsPut,
    PacketPutN7,
    PacketCallN3,
}

impl ReproCase {
    pub const ALL: [ReproCase; 4] = [
        ReproCase::NlsCall,
        ReproCase::NlsPut,
        ReproCase::PacketPutN7,
        ReproCase::PacketCallN3,
    ];

    pub fn kind(self) -> OptionKind {
        match self {
            ReproCase::NlsCall | ReproCase::PacketCallN3 => OptionKind::Call,
            ReproCase::NlsPut | ReproCase::PacketPutN7 => OptionKind::Put,
        }
    }

    pub fn published(self) -> Option<&'static PublishedPacketFit> {
        match self {
            ReproCase::PacketPutN7 => Some(&published::PUT_N7),
            ReproCase::PacketCallN3 => Some(&published::CALL_N3),
            _ => None,
        }
    }
}

/// Location of the largest slope mismatch between model and target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkReport {
    pub s: f64,
    /// `max |d/ds model - d/ds target|`.
    pub slope_gap: f64,
    /// Whether the location lies within `window` of the strike.
    pub near_strike: bool,
    pub window: f64,
}

/// Half-width of the strike window used to flag a kink.
pub const KINK_WINDOW: f64 = 10.0;

/// Central-difference slope mismatch over the interior of the curve.
pub fn locate_kink(s: &[f64], model: &[f64], target: &[f64], strike: f64) -> Option<KinkReport> {
    if s.len() < 3 {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    for i in 1..s.len() - 1 {
        let h = s[i + 1] - s[i - 1];
        let gap = ((model[i + 1] - model[i - 1]) - (target[i + 1] - target[i - 1])).abs() / h;
        if best.is_none_or(|(_, g)| gap > g) {
            best = Some((s[i], gap));
        }
    }
    best.map(|(at, gap)| KinkReport {
        s: at,
        slope_gap: gap,
        near_strike: (at - strike).abs() <= KINK_WINDOW,
        window: KINK_WINDOW,
    })
}

/// Outcome of one reproduction case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproReport {
    pub case: ReproCase,
    pub kind: OptionKind,
    pub option: OptionParams<f64>,
    pub start: Vec<f64>,
    pub start_rmse: f64,
    pub fit: FitResult<f64>,
    /// Published coefficients, verbatim, when the source lists them.
    pub published: Option<PublishedPacketFit>,
    pub s: Vec<f64>,
    pub target: Vec<f64>,
    pub model: Vec<f64>,
    pub kink: Option<KinkReport>,
}

/// Start list for the NLS reproduction fits with [`NLS_ROWS`] weight rows:
/// `[w1, w2, w3, w1', w2', w3', k, t, sigma]`. The notch `s = sigma k t`
/// is placed at the strike or outside the window, and `|sigma / beta(s)|`
/// is sized to the curve's level.
pub fn nls_start_list(kind: OptionKind) -> Vec<Vec<f64>> {
    match kind {
        OptionKind::Put => vec![
            vec![0.05, 0.87, 708.0, -0.028, 1.9, 412.0, -22.6, 1.0, 0.019],
            vec![0.2, 1.0, 100.0, -0.1, 1.0, 50.0, 100.0, 1.0, 0.2],
            vec![1.0, 1.0, 30.0, -0.5, 1.0, 300.0, 60.0, 1.0, 1.0],
        ],
        OptionKind::Call => vec![
            vec![1.27, 1.31, 392.0, -0.132, 1.31, 40.7, 100.0, 1.0, 0.41],
            vec![1.0, 1.0, 100.0, -0.5, 1.0, 30.0, 75.0, 1.0, 0.2],
            vec![0.5, 1.0, 300.0, -0.1, 1.0, 50.0, 150.0, 1.0, 1.0],
        ],
    }
}

fn nls_config(model: NlsModel, rate: f64) -> NlsFitConfig<f64> {
    NlsFitConfig {
        model,
        n_rows: NLS_ROWS,
        rate,
        normalize: false,
    }
}

/// Weight rows used by the reproduction fits. A single `erf` row has no
/// sign change, so `1/beta` cannot rise towards large prices.
pub const NLS_ROWS: usize = 2;

/// Best shock fit over [`nls_start_list`]; ties go to the earlier start.
pub fn fit_nls_best(
    target: &Target<f64>,
    kind: OptionKind,
    rate: f64,
    opts: &LmOptions<f64>,
) -> Result<(Vec<f64>, FitResult<f64>)> {
    let cfg = nls_config(NlsModel::Shock, rate);
    let mut best: Option<(Vec<f64>, FitResult<f64>)> = None;
    let mut last_err = None;
    for start in nls_start_list(kind) {
        match fit_nls_to_bs(target, cfg, &start, opts) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|(_, b)| fit.rmse < b.rmse) {
                    best = Some((start, fit));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::param("start list", "empty")))
}

/// Blend fit started from a shock optimum with `d = (1, 0)`. Since the blend
/// model reproduces the shock model there, its cost can only go down.
pub fn fit_blend_from_shock(
    target: &Target<f64>,
    rate: f64,
    shock_theta: &[f64],
    opts: &LmOptions<f64>,
) -> Result<FitResult<f64>> {
    let mut start = shock_theta.to_vec();
    start.extend_from_slice(&[1.0, 0.0]);
    fit_nls_to_bs(target, nls_config(NlsModel::Blend, rate), &start, opts)
}

/// Runs one reproduction case against the reference Black-Scholes curve on
/// [`default_grid`].
pub fn reproduce_paper_fit(case: ReproCase, opts: &LmOptions<f64>) -> Result<ReproReport> {
    let option = OptionParams::reference();
    let kind = case.kind();
    let target = Target::black_scholes(&default_grid(), &option, kind)?;
    let (start, fit, model) = match case {
        ReproCase::NlsCall | ReproCase::NlsPut => {
            let (start, fit) = fit_nls_best(&target, kind, option.rate, opts)?;
            let model = nls_config(NlsModel::Shock, option.rate).curve(&target.s, &fit.theta)?;
            (start, fit, model)
        }
        ReproCase::PacketPutN7 | ReproCase::PacketCallN3 => {
            let p = case.published().expect("packet cases carry coefficients");
            let start = p.theta();
            let fit = fit_packet_to_bs(&target, p.n(), &start, opts)?;
            let model = packet_curve(&target.s, &fit.theta)?;
            (start, fit, model)
        }
    };
    let start_rmse = match case {
        ReproCase::NlsCall | ReproCase::NlsPut => rmse(
            &NlsObjective::new(&target, nls_config(NlsModel::Shock, option.rate))?
                .residuals(&start)?,
        ),
        _ => rmse(&PacketObjective::new(&target, (start.len() - 2) / 2, false)?.residuals(&start)?),
    };
    let kink = locate_kink(&target.s, &model, &target.values, option.strike);
    Ok(ReproReport {
        case,
        kind,
        option,
        start,
        start_rmse,
        fit,
        published: case.published().cloned(),
        s: target.s.clone(),
        target: target.values.clone(),
        model,
        kink,
    })
}

/// RMSE of a published packet against its Black-Scholes target, no re-fit.
pub fn published_packet_rmse(p: &PublishedPacketFit, kind: OptionKind) -> Result<f64> {
    let target = Target::black_scholes(&default_grid(), &OptionParams::reference(), kind)?;
    let model = packet_curve(&target.s, &p.theta())?;
    let r: Vec<f64> = model
        .iter()
        .zip(&target.values)
        .map(|(m, y)| m - y)
        .collect();
    Ok(rmse(&r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_jacobian_matches_differences() {
        let target = Target::new(vec![0.5, 1.0, 1.7, 2.2, 3.0], vec![1.0; 5]).unwrap();
        let obj = PacketObjective::new(&target, 2, false).unwrap();
        let theta = [0.3f64, 0.7, 1.2, -0.4, 0.9, 1.5];
        let a = obj.jacobian(&theta).unwrap();
        let b = finite_difference_jacobian(&obj, &theta).unwrap();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-8 * (1.0 + a.get(i, j).abs()));
            }
        }
    }

    #[test]
    fn single_wave_fit_reaches_the_mean() {
        let values = vec![1.0, 2.0, 4.0, 3.0, 5.0, 3.0];
        let s: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let target = Target::new(s, values.clone()).unwrap();
        let fit =
            fit_packet_to_bs(&target, 1, &[0.2, 1.0, 0.5, 1.0], &LmOptions::default()).unwrap();
        let mean = values.iter().sum::<f64>() / 6.0;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 6.0).sqrt();
        assert!((fit.theta[3].powi(2) - mean).abs() < 1e-8);
        assert!((fit.rmse - sd).abs() < 1e-8);
    }

    #[test]
    fn blend_with_unit_tanh_weight_is_the_shock_model() {
        let target =
            Target::black_scholes(&default_grid(), &OptionParams::reference(), OptionKind::Put)
                .unwrap();
        let theta = [0.2, 1.0, 100.0, 100.0, 1.0, 0.2];
        let shock = NlsFitConfig {
            model: NlsModel::Shock,
            n_rows: 1,
            rate: 0.05,
            normalize: false,
        };
        let blend = NlsFitConfig {
            model: NlsModel::Blend,
            ..shock
        };
        let mut tb = theta.to_vec();
        tb.extend_from_slice(&[1.0, 0.0]);
        assert_eq!(
            shock.curve(&target.s, &theta).unwrap(),
            blend.curve(&target.s, &tb).unwrap()
        );
        assert!(shock.curve(&target.s, &theta[..5]).is_err());
    }

    #[test]
    fn kink_locator_finds_slope_break() {
        let s: Vec<f64> = (0..41).map(|i| 80.0 + i as f64).collect();
        let target: Vec<f64> = s.iter().map(|x| (100.0 - x).max(0.0)).collect();
        // smoothed hinge: matches the target away from the strike
        let model: Vec<f64> = s
            .iter()
            .map(|x| 0.5 * ((100.0 - x) + ((100.0 - x).powi(2) + 4.0).sqrt()))
            .collect();
        let k = locate_kink(&s, &model, &target, 100.0).unwrap();
        assert!(k.near_strike);
        assert!((k.s - 100.0).abs() <= 1.0);
    }
}
