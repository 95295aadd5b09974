use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sve_core::experiment::{ExperimentConfig, Reconstructor};
use sve_core::risk::Estimator;

use crate::error::CliResult;
use crate::io::write_json;

/// Inputs of one run; enough to repeat it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config_path: Option<PathBuf>,
    pub levels_path: Option<PathBuf>,
    pub scenes: Vec<String>,
    pub output: PathBuf,
    pub estimators: Vec<Estimator>,
    pub reconstructors: Vec<Reconstructor>,
    /// Configuration after defaults and overrides were applied.
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: &ExperimentConfig, output: &Path) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config_path: None,
            levels_path: None,
            scenes: Vec::new(),
            output: output.to_path_buf(),
            estimators: config.estimators.clone(),
            reconstructors: config.reconstructors.clone(),
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }
}
