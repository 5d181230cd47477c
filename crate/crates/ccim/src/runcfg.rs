//! Run configuration schema for the experiment runner.
//!
//! A run config is a TOML document merging the macro configuration with
//! experiment parameters; command-line flags override file values. The
//! effective config echoes into every JSON summary so a run is reproducible
//! from its own output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmacro::MacroConfig;
use crate::costmodel::ComponentCosts;
use crate::doa::{AngleDraw, DoaScenario};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Master seed for trial derivation.
    pub seed: u64,
    /// Complex outputs per RMS evaluation.
    pub trials: u64,
    /// Mismatch seeds per Monte Carlo point.
    pub seeds_per_point: u32,
    /// Complex outputs per mismatch seed.
    pub trials_per_seed: u64,
    /// Mismatch levels for the RMS-vs-sigma curve.
    pub sigma_list: Vec<f64>,
    /// Seeds for ADC characterization.
    pub adc_seeds: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            trials: 100_000,
            seeds_per_point: 50,
            trials_per_seed: 4_000,
            sigma_list: vec![0.0, 0.0148, 0.0296, 0.0592],
            adc_seeds: 1000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct DoaRunConfig {
    pub scenario: DoaScenario,
    pub trials: u32,
    pub angle_draw: AngleDraw,
}

impl Default for DoaRunConfig {
    fn default() -> Self {
        DoaRunConfig { scenario: DoaScenario::default(), trials: 200, angle_draw: AngleDraw::OnGrid }
    }
}

/// Merged view of everything a run needs. All fields have defaults, so an
/// empty document is a valid config.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", default)]
pub struct RunConfig {
    #[serde(rename = "macro")]
    pub macro_cfg: MacroConfig,
    pub experiment: ExperimentConfig,
    pub doa: DoaRunConfig,
    pub cost: ComponentCosts,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.experiment.trials == 0 || self.experiment.trials_per_seed == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if self.experiment.sigma_list.is_empty() {
            return Err(ConfigError::Invalid("sigma_list must be non-empty".into()));
        }
        if self.experiment.sigma_list.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(ConfigError::Invalid("sigma_list entries must be >= 0".into()));
        }
        if self.macro_cfg.analog.sigma_u < 0.0 || !self.macro_cfg.analog.sigma_u.is_finite() {
            return Err(ConfigError::Invalid("sigma_u must be >= 0".into()));
        }
        if self.macro_cfg.adc.offset_code > 127 {
            return Err(ConfigError::Invalid("adc offset_code must be in [0,127]".into()));
        }
        if self.macro_cfg.adc.lsb_units == 0 {
            return Err(ConfigError::Invalid("adc lsb_units must be >= 1".into()));
        }
        self.doa.scenario.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.doa.trials == 0 {
            return Err(ConfigError::Invalid("doa trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parse a standalone cost config document.
pub fn cost_config_from_toml(text: &str) -> Result<ComponentCosts, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// Parse a standalone DOA scenario document.
pub fn doa_scenario_from_toml(text: &str) -> Result<DoaScenario, ConfigError> {
    let sc: DoaScenario = toml::from_str(text)?;
    sc.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(sc)
}
