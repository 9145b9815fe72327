//! Versioned run configuration files.

use std::path::Path;

use aad_core::behavioral::{SpeakerLayout, TRIALS_PER_LAYOUT};
use aad_core::decoding::{default_lambda_grid, FinalFit, LagSpec};
use aad_core::signal::{BandSpec, DEFAULT_BAND, WORKING_RATE};
use aad_core::simulation::SimulationConfig;
use aad_core::stats::PairwiseVariance;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

/// Top-level configuration file. Every section is optional; command-line
/// flags override values read from here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub preprocess: Option<PreprocessConfig>,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub simulate: Option<SimulationConfig>,
    #[serde(default)]
    pub behavioral: Option<BehavioralConfig>,
    #[serde(default)]
    pub stats: Option<StatsConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if value.get("version").is_none() {
            return Err("missing mandatory field 'version'".into());
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| e.to_string())?;
        if cfg.version != CONFIG_VERSION {
            return Err(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            ));
        }
        Ok(cfg)
    }

    pub fn load_optional(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self {
                version: CONFIG_VERSION,
                ..Self::default()
            }),
        }
    }
}

fn working_rate() -> f64 {
    WORKING_RATE
}
fn band_low() -> f64 {
    DEFAULT_BAND.low_hz
}
fn band_high() -> f64 {
    DEFAULT_BAND.high_hz
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    #[serde(default = "working_rate")]
    pub rate: f64,
    #[serde(default = "band_low")]
    pub low_hz: f64,
    #[serde(default = "band_high")]
    pub high_hz: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            rate: working_rate(),
            low_hz: band_low(),
            high_hz: band_high(),
        }
    }
}

impl PreprocessConfig {
    pub fn band(&self) -> BandSpec {
        BandSpec::new(self.low_hz, self.high_hz)
    }
}

fn tau_max() -> f64 {
    250.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub tau_min_ms: f64,
    #[serde(default = "tau_max")]
    pub tau_max_ms: f64,
    #[serde(default = "default_lambda_grid")]
    pub grid: Vec<f64>,
    /// Fixed regularization; skips cross-validation when set.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub final_fit: FinalFit,
    /// Expected sampling rate of the corpus.
    #[serde(default = "working_rate")]
    pub rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            tau_min_ms: 0.0,
            tau_max_ms: tau_max(),
            grid: default_lambda_grid(),
            lambda: None,
            final_fit: FinalFit::Joint,
            rate: working_rate(),
        }
    }
}

impl TrainConfig {
    pub fn lags(&self) -> CliResult<LagSpec> {
        Ok(LagSpec::new(self.tau_min_ms, self.tau_max_ms, self.rate)?)
    }
}

fn target_levels() -> Vec<f64> {
    vec![75.0, 65.0, 55.0]
}
fn ci_tmr() -> f64 {
    10.0
}
fn reps() -> usize {
    TRIALS_PER_LAYOUT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehavioralConfig {
    #[serde(default)]
    pub seed: u64,
    /// Target levels in dB SPL, one session each.
    #[serde(default = "target_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "ci_tmr")]
    pub tmr_db: f64,
    #[serde(default = "reps")]
    pub reps: usize,
    /// Defaults to the target at each of the five loudspeakers.
    #[serde(default)]
    pub layouts: Option<Vec<SpeakerLayout>>,
}

impl Default for BehavioralConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            levels: target_levels(),
            tmr_db: ci_tmr(),
            reps: reps(),
            layouts: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsConfig {
    #[serde(default)]
    pub pairwise_variance: PairwiseVariance,
}

/// Parses `default` or a comma-separated list of lambda values.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    if text.trim() == "default" {
        return Ok(default_lambda_grid());
    }
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid lambda '{v}' in --grid")))
        })
        .collect()
}

pub fn parse_levels(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid level '{v}' in --levels")))
        })
        .collect()
}
