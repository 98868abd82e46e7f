//! Experiment configuration files.

use std::path::{Path, PathBuf};

use graphon_lab::gcn::Activation;
use graphon_lab::sampling::EdgeCoupling;
use graphon_lab::testing::DistanceConstants;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::spec::{GraphonSpec, SpecRef};

pub const SCHEMA_VERSION: u32 = 1;

/// Depth per graph size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// The same `K` at every size.
    Fixed(usize),
    /// `K = ⌈D ln n⌉`.
    Log { d: f64 },
}

impl KRule {
    pub fn depth(self, n: usize) -> usize {
        match self {
            KRule::Fixed(k) => k,
            KRule::Log { d } => (d * (n as f64).ln()).ceil() as usize,
        }
    }
}

impl Default for KRule {
    fn default() -> Self {
        KRule::Log { d: 6.0 }
    }
}

/// Perturbation scale per graph size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsRule {
    Fixed(f64),
    /// `ε = c / n`.
    PerN { c: f64 },
    /// `ε = f · δ / n`, with `δ` the pair's degree distance.
    DeltaPerN { f: f64 },
}

impl EpsRule {
    pub fn eps(self, n: usize, delta: f64) -> f64 {
        match self {
            EpsRule::Fixed(e) => e,
            EpsRule::PerN { c } => c / n as f64,
            EpsRule::DeltaPerN { f } => f * delta / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for CSV, JSON and the manifest, relative to the config file.
    pub dir: PathBuf,
}

/// JSON experiment description. See `graphon-lab experiment --help`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// `[w0, w1]`, each inline or a file path.
    pub models: [SpecRef; 2],
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub k_rule: KRule,
    pub eps_rule: EpsRule,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    pub trials: usize,
    /// Trials for the coupled distance experiment; defaults to `trials`.
    #[serde(default)]
    pub distance_trials: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub coupling: EdgeCoupling,
    /// Constant in the zero-distance error formula.
    #[serde(default = "one")]
    pub const_c: f64,
    #[serde(default)]
    pub envelope: DistanceConstants,
    pub output: OutputConfig,
}

fn default_activation() -> Activation {
    Activation::Identity
}

fn one() -> f64 {
    1.0
}

/// A validated config with its models resolved.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub models: [GraphonSpec; 2],
    pub output_dir: PathBuf,
    pub sha256: String,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "schema_version {} unsupported, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n < 2) {
            return Err(CliError::config("n_list must be non-empty with every n >= 2"));
        }
        if self.trials == 0 || self.distance_trials == Some(0) {
            return Err(CliError::config("trials must be at least 1"));
        }
        if let KRule::Log { d } = self.k_rule {
            if !(d.is_finite() && d > 0.0) {
                return Err(CliError::config(format!("k_rule d must be positive, got {d}")));
            }
        }
        if let KRule::Fixed(0) = self.k_rule {
            return Err(CliError::config("k_rule fixed depth must be at least 1"));
        }
        Ok(())
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_slice(&bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    let base = path.parent();
    let models = [config.models[0].resolve(base)?, config.models[1].resolve(base)?];
    let output_dir = base.map_or_else(|| config.output.dir.clone(), |b| b.join(&config.output.dir));
    Ok(LoadedConfig { sha256: crate::output::sha256_hex(&bytes), config, models, output_dir })
}
