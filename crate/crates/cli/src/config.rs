//! Run configuration. Every block is optional and falls back to the
//! defaults below; unknown keys are rejected at every level.

use std::path::PathBuf;

use anyhow::{bail, Result};
use optwave::fitting::{LmOptions, ReproCase, NLS_ROWS};
use optwave::nls::{Branch, RadicandMode};
use optwave::{BetaSource, OptionKind, OptionParams, PlaneWave, Solution, SpatialGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Price grid; each command has its own default.
    pub grid: Option<SpatialGrid<f64>>,
    pub option: OptionParams<f64>,
    pub bs_curve: BsCurveConfig,
    pub greeks: GreeksConfig,
    pub nls: NlsEvalConfig,
    pub packet: PacketConfig,
    pub fit: FitConfig,
    pub evolve: EvolveConfig,
    pub reproduce: ReproduceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: None,
            format: None,
            grid: None,
            option: OptionParams::reference(),
            bs_curve: BsCurveConfig::default(),
            greeks: GreeksConfig::default(),
            nls: NlsEvalConfig::default(),
            packet: PacketConfig::default(),
            fit: FitConfig::default(),
            evolve: EvolveConfig::default(),
            reproduce: ReproduceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.option.validate()?;
        if self.bs_curve.gbm_steps == 0 {
            bail!("bs_curve.gbm_steps must be at least 1");
        }
        if self.greeks.times.is_empty() {
            bail!("greeks.times must not be empty");
        }
        if let Some(s) = self.packet.sigma {
            if !(s > 0.0) {
                bail!("packet.sigma must be positive, got {s}");
            }
        }
        if let Some(s) = self.evolve.sigma {
            if !(s > 0.0) {
                bail!("evolve.sigma must be positive, got {s}");
            }
        }
        if let Some(dt) = self.evolve.dt {
            if !(dt > 0.0) {
                bail!("evolve.dt must be positive, got {dt}");
            }
        }
        if let Some(t) = self.evolve.t_final {
            if !(t >= 0.0) {
                bail!("evolve.t_final must be non-negative, got {t}");
            }
        }
        if self.evolve.record_every == Some(0) {
            bail!("evolve.record_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsCurveConfig {
    /// Steps of the sample price path over the option's maturity.
    pub gbm_steps: usize,
    /// Start of the price path; the strike when absent.
    pub spot: Option<f64>,
}

impl Default for BsCurveConfig {
    fn default() -> Self {
        Self {
            gbm_steps: 252,
            spot: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreeksModel {
    #[default]
    BlackScholes,
    Packet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreeksConfig {
    pub model: GreeksModel,
    pub kind: OptionKind,
    /// Remaining maturities (Black-Scholes) or packet times.
    pub times: Vec<f64>,
}

impl Default for GreeksConfig {
    fn default() -> Self {
        Self {
            model: GreeksModel::BlackScholes,
            kind: OptionKind::Call,
            times: vec![0.25, 0.5, 0.75, 1.0, 1.25],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NlsEvalConfig {
    pub solution: Solution,
    pub sigma: f64,
    pub wave_number: f64,
    pub modulus: f64,
    pub beta: BetaSource<f64>,
    pub branch: Branch,
    pub radicand: RadicandMode,
    pub t: f64,
}

impl Default for NlsEvalConfig {
    fn default() -> Self {
        Self {
            solution: Solution::Soliton,
            sigma: 1.0,
            wave_number: 1.0,
            modulus: 1.0,
            beta: BetaSource::Constant(1.0),
            branch: Branch::Plus,
            radicand: RadicandMode::Signed,
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PublishedSet {
    PutN7,
    CallN3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketConfig {
    /// Published coefficient set; ignored when `waves` is non-empty.
    pub published: PublishedSet,
    pub sigma: Option<f64>,
    pub waves: Vec<PlaneWave<f64>>,
    /// Evaluation time; the published `t*` when absent.
    pub t: Option<f64>,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            published: PublishedSet::PutN7,
            sigma: None,
            waves: Vec::new(),
            t: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    #[default]
    Packet,
    NlsShock,
    NlsBlend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Runs a reproduction case instead of the model below.
    pub case: Option<ReproCase>,
    pub model: FitModel,
    pub kind: OptionKind,
    /// Start vector; a published or listed start when absent.
    pub theta0: Option<Vec<f64>>,
    pub n_rows: usize,
    pub rate: f64,
    pub normalize: bool,
    pub lm: LmOptions<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            case: None,
            model: FitModel::Packet,
            kind: OptionKind::Put,
            theta0: None,
            n_rows: NLS_ROWS,
            rate: 0.05,
            normalize: false,
            lm: LmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReproduceConfig {
    pub cases: Vec<ReproCase>,
    pub lm: LmOptions<f64>,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self {
            cases: ReproCase::ALL.to_vec(),
            lm: LmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Gaussian spreading under the NLS flow, `beta = 0` by default.
    #[default]
    Gaussian,
    /// Bright NLS soliton against its closed form.
    Soliton,
    /// Coupled vector soliton against its closed form.
    ManakovSoliton,
    /// Head-on collision of two orthogonally polarised solitons.
    Collision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub preset: Preset,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub record_every: Option<usize>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Gaussian,
            dt: None,
            t_final: None,
            record_every: None,
            sigma: None,
            beta: None,
        }
    }
}
