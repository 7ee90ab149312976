use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use itra_core::harness::{ExperimentConfig, SynthConfig};
use itra_core::io::config_hash;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data: Option<PathBuf>,
    pub bank: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Everything a subcommand may need. A missing `experiment` section means
/// the desk preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub synth: SynthConfig,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::desk(),
            synth: SynthConfig::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, super::CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| itra_core::Error::from(e).at(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| itra_core::Error::from(e).at(path))?;
        cfg.experiment.validate().map_err(|e| e.at(path))?;
        Ok(cfg)
    }

    /// Hash of the parameters that affect results; paths are excluded.
    pub fn hash(&self) -> String {
        config_hash(&self.experiment)
    }
}
