//! Engine configuration, loaded from JSON. Every field has a usable default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::ExecContext;
use crate::optimizer::{AdaptCaps, CrossoverConfig, Policy};
use crate::sim::{DeviceModel, SimError, DEFAULT_SHOTS};
use crate::sql::PhysicalOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Device(#[from] SimError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Device model file; relative paths resolve against the config file.
    pub device_path: Option<PathBuf>,
    /// Inline device model, used when no path is given.
    pub device: Option<DeviceModel>,
    /// Overrides the device's qubit cap.
    pub qubit_cap: Option<usize>,
    pub shots: usize,
    pub seed: u64,
    /// Sample with the device's stochastic noise instead of ideally.
    pub noisy: bool,
    /// Phase register width for COUNT/SUM/AVG.
    pub phase_bits: usize,
    /// Index strategy threshold constant.
    pub index_c: f64,
    pub adapt: AdaptCaps,
    pub policy: Policy,
    /// Sweep settings for `bench crossover`, including depth-model overrides.
    pub crossover: CrossoverConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            device_path: None,
            device: None,
            qubit_cap: None,
            shots: DEFAULT_SHOTS,
            seed: 0,
            noisy: false,
            phase_bits: 6,
            index_c: 2.0,
            adapt: AdaptCaps::default(),
            policy: Policy::default(),
            crossover: CrossoverConfig::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.device_path, path.parent()) {
            if p.is_relative() {
                cfg.device_path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.shots == 0 {
            return bad("shots must be positive");
        }
        if !(1..=16).contains(&self.phase_bits) {
            return bad("phase_bits must be in 1..=16");
        }
        if self.index_c <= 0.0 || !self.index_c.is_finite() {
            return bad("index_c must be positive");
        }
        if self.policy.deferred_band < 0.0 || self.policy.queue_delay_ns < 0.0 {
            return bad("deferred_band and queue_delay_ns must be non-negative");
        }
        if self.adapt.max_shot_growth == 0 || !(0.0..=1.0).contains(&self.adapt.success_ratio) {
            return bad("adapt caps out of range");
        }
        if self.crossover.log2_n_min > self.crossover.log2_n_max || self.crossover.log2_n_max > 60 {
            return bad("crossover sweep must satisfy log2_n_min <= log2_n_max <= 60");
        }
        Ok(())
    }

    /// Device from the path, the inline model or the default, with the cap override applied.
    pub fn resolve_device(&self) -> Result<DeviceModel, ConfigError> {
        let mut d = match (&self.device_path, &self.device) {
            (Some(p), _) => DeviceModel::load(p)?,
            (None, Some(d)) => d.clone(),
            (None, None) => DeviceModel::default(),
        };
        if let Some(cap) = self.qubit_cap {
            d.qubit_cap = cap;
        }
        Ok(d)
    }

    pub fn physical_options(&self, device: &DeviceModel) -> PhysicalOptions {
        PhysicalOptions {
            shots: self.shots,
            phase_bits: self.phase_bits,
            device: device.clone(),
        }
    }

    pub fn exec_context(&self, device: &DeviceModel, seed: u64) -> ExecContext {
        ExecContext {
            device: device.clone(),
            seed,
            noisy: self.noisy,
            shots: self.shots,
            phase_bits: self.phase_bits,
            queue_delay_ns: self.policy.queue_delay_ns,
            latency_budget_ns: self.policy.latency_budget_ns,
            index_c: self.index_c,
            adapt: self.adapt,
        }
    }
}
