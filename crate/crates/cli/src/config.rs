//! Experiment configuration: a JSON object whose unknown keys are errors.
//!
//! ```json
//! {
//!   "experiment": "genealogy_convergence",
//!   "N_grid": [50, 200, 1000],
//!   "n": 5,
//!   "scheme": "multinomial",
//!   "weight_model": { "kind": "iid_potential",
//!                     "potential": { "kind": "uniform", "low": 0.5, "high": 2.0 } },
//!   "t_max": 1.0,
//!   "replicates": 2000,
//!   "master_seed": 20240501
//! }
//! ```

use std::path::PathBuf;

use coalgen::{ResamplingScheme, WeightModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest sample for the coupled chain, whose rows enumerate partitions.
pub const MAX_COUPLED_SAMPLE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GenealogyConvergence,
    CoupledChain,
    BoundsSuite,
    KingmanReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Population sizes.
    #[serde(rename = "N_grid", default)]
    pub population_grid: Vec<usize>,
    /// Sample size.
    pub n: usize,
    #[serde(default = "default_scheme")]
    pub scheme: ResamplingScheme,
    #[serde(default = "default_weight_model")]
    pub weight_model: WeightModel,
    /// Rescaled horizon.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    pub replicates: usize,
    pub master_seed: u64,
    /// Generation budget per replicate; defaults to `10 N ceil(t_max)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Track the coupled jump counter while tracing.
    #[serde(default = "default_true")]
    pub track_counter: bool,
    /// Rescaled times at which partition laws are compared with the limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fdd_times: Option<Vec<f64>>,
    /// Environment length for `coupled_chain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupled_generations: Option<usize>,
    /// Offspring-count rows for `bounds_suite`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_size: Option<usize>,
    /// Null simulations behind each calibrated KS threshold.
    #[serde(default = "default_null_replicates")]
    pub ks_null_replicates: usize,
}

fn default_scheme() -> ResamplingScheme {
    ResamplingScheme::Multinomial
}

fn default_weight_model() -> WeightModel {
    WeightModel::Constant
}

fn default_t_max() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_null_replicates() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ExperimentConfig {
    /// Parses and validates; returns the config and any warnings.
    pub fn from_json_str(text: &str) -> Result<(Self, Vec<String>), ConfigError> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| ConfigError { line: Some(e.line()), message: format!("column {}: {e}", e.column()) })?;
        let warnings =
            config.validate().map_err(|(key, message)| ConfigError { line: line_of_key(text, key), message })?;
        Ok((config, warnings))
    }

    /// Default generation budget at population size `population`.
    pub fn hard_cap_for(&self, population: usize) -> usize {
        self.hard_cap.unwrap_or_else(|| 10 * population * self.t_max.ceil().max(1.0) as usize)
    }

    pub fn fdd_times_or_default(&self) -> Vec<f64> {
        self.fdd_times.clone().unwrap_or_else(|| [0.25, 0.5, 1.0].into_iter().filter(|&t| t <= self.t_max).collect())
    }

    /// Checks cross-field constraints; errors name the offending key.
    pub fn validate(&self) -> Result<Vec<String>, (&'static str, String)> {
        let mut warnings = Vec::new();
        if self.replicates == 0 {
            return Err(("replicates", "replicates must be at least 1".into()));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(("t_max", format!("t_max must be positive and finite, got {}", self.t_max)));
        }
        if self.ks_null_replicates == 0 {
            return Err(("ks_null_replicates", "ks_null_replicates must be at least 1".into()));
        }
        self.weight_model.validate().map_err(|e| ("weight_model", e.to_string()))?;
        if let Some(times) = &self.fdd_times {
            if times.iter().any(|&t| !(t >= 0.0 && t <= self.t_max)) {
                return Err(("fdd_times", format!("fdd_times must lie in [0, t_max = {}]", self.t_max)));
            }
        }
        let needs_grid = self.experiment != ExperimentKind::KingmanReference;
        if needs_grid {
            if self.population_grid.is_empty() {
                return Err(("N_grid", "N_grid must list at least one population size".into()));
            }
            if let Some(&bad) = self.population_grid.iter().find(|&&p| p < 2) {
                return Err(("N_grid", format!("population sizes must be at least 2, got {bad}")));
            }
            let min_n = *self.population_grid.iter().min().unwrap();
            if self.n > min_n {
                return Err(("n", format!("sample size {} exceeds the smallest population {min_n}", self.n)));
            }
        }
        let min_sample = if self.experiment == ExperimentKind::CoupledChain { 1 } else { 2 };
        if self.n < min_sample {
            return Err(("n", format!("sample size must be at least {min_sample}, got {}", self.n)));
        }
        match self.experiment {
            ExperimentKind::CoupledChain => {
                if self.n > MAX_COUPLED_SAMPLE {
                    return Err(("n", format!("coupled chain supports n <= {MAX_COUPLED_SAMPLE}, got {}", self.n)));
                }
                if self.coupled_generations == Some(0) {
                    return Err(("coupled_generations", "coupled_generations must be at least 1".into()));
                }
            }
            ExperimentKind::BoundsSuite => {
                if self.corpus_size == Some(0) {
                    return Err(("corpus_size", "corpus_size must be at least 1".into()));
                }
            }
            ExperimentKind::GenealogyConvergence => {
                if let Some(cap) = self.hard_cap {
                    if cap == 0 {
                        return Err(("hard_cap", "hard_cap must be at least 1".into()));
                    }
                    for &p in &self.population_grid {
                        let expected = 10.0 * p as f64 * self.t_max;
                        if (cap as f64) < expected {
                            warnings.push(format!(
                                "hard_cap {cap} is below 10 N t_max = {expected} for N = {p}; expect censoring"
                            ));
                        }
                    }
                }
            }
            ExperimentKind::KingmanReference => {}
        }
        Ok(warnings)
    }
}

/// 1-based line of the first occurrence of `"key"` followed by a colon.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|line| line.find(&needle).is_some_and(|i| line[i + needle.len()..].trim_start().starts_with(':')))
        .map(|i| i + 1)
}
