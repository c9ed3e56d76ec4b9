//! Experiment configuration: which suites to run, ensemble sizes, seeds,
//! exponent lists, and output plumbing.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

pub const SUITE_NAMES: [&str; 7] = [
    "fv-calculus",
    "compensator",
    "davis",
    "bdg-exact",
    "stein",
    "duality-interp",
    "bdg-mc",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSettings {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dim: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            n_paths: 2000,
            n_steps: 2000,
            dim: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub suites: Vec<String>,
    pub seed: u64,
    /// Exponents for the sweeps that take a free p.
    pub p_values: Vec<f64>,
    /// Number of random tree martingales per exact-engine sweep.
    pub ensemble_count: usize,
    /// Cap asserted where only a qualitative bound exists.
    pub constant_cap: f64,
    pub mc: McSettings,
    pub aux_eps: f64,
    pub output: Option<String>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suites: SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
            seed: 20240901,
            p_values: vec![1.0, 1.5, 2.0, 3.0, 4.0],
            ensemble_count: 300,
            constant_cap: 64.0,
            mc: McSettings::default(),
            aux_eps: 1e-6,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for s in &self.suites {
            if !SUITE_NAMES.contains(&s.as_str()) {
                return Err(EngineError::Config(format!(
                    "unknown suite {s:?}; known suites: {}",
                    SUITE_NAMES.join(", ")
                )));
            }
        }
        if self.suites.is_empty() {
            return Err(EngineError::Config("no suites selected".into()));
        }
        if self.p_values.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(EngineError::Config("p values must lie in (0, inf)".into()));
        }
        if self.ensemble_count == 0 {
            return Err(EngineError::Config("ensemble_count must be >= 1".into()));
        }
        if !(self.constant_cap > 0.0) {
            return Err(EngineError::Config("constant_cap must be positive".into()));
        }
        if !(self.aux_eps > 0.0) {
            return Err(EngineError::Config("aux_eps must be positive".into()));
        }
        if self.mc.n_paths == 0 || self.mc.n_steps == 0 || self.mc.dim == 0 {
            return Err(EngineError::Config("mc settings must all be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| EngineError::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
