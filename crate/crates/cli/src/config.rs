//! Run configuration: one JSON file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use driftlane::cluster::WeightSearch;
use driftlane::optim::BfgsOptions;
use driftlane::simulate::{CrossingRule, ScenarioConfig};
use driftlane::trajectory::{ColumnSchema, ExtractConfig};
use driftlane::{Convention, DdmParams, FeatureWeights, FitOptions};
use serde::{Deserialize, Serialize};

use crate::io::{read_json, InputError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Trajectory CSV for `extract`.
    pub input: Option<PathBuf>,
    pub schema: ColumnSchema,
    pub extract: ExtractConfig,
    pub cluster: ClusterConfig,
    pub fit: FitConfig,
    pub convention: Convention,
    pub seed: u64,
    pub simulate: SimulateConfig,
    pub scenario: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// First starting point of the weight search.
    pub start: FeatureWeights,
    pub search: WeightSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub p0: DdmParams,
    pub bfgs: BfgsOptions,
    pub p_values: driftlane::estimation::PValueMethod,
    pub allow_constant_override: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        let defaults = FitOptions::default();
        Self {
            p0: DdmParams::reference(),
            bfgs: defaults.bfgs,
            p_values: defaults.p_values,
            allow_constant_override: false,
        }
    }
}

impl FitConfig {
    pub fn options(&self, convention: Convention) -> FitOptions {
        FitOptions {
            bfgs: self.bfgs,
            convention,
            p_values: self.p_values,
            allow_constant_override: self.allow_constant_override,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_paths: usize,
    pub horizon: f64,
    pub crossing: CrossingRule,
    /// Seconds between CDF checkpoints in the summary.
    pub checkpoint_every: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            horizon: 60.0,
            crossing: CrossingRule::Bridge,
            checkpoint_every: 5.0,
        }
    }
}

pub fn load(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let cfg: RunConfig = read_json(path)?;
    if cfg.extract.lanes.is_empty() {
        return Err(InputError::new("extract.lanes must not be empty").into());
    }
    Ok(cfg)
}
