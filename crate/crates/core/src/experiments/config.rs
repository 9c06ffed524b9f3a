//! JSON run configuration; every field mirrors a command-line flag.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub p: Option<f64>,
    pub schedule: Option<String>,
    pub runs: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub estimators: Option<String>,
    pub lambda_hat: Option<String>,
    pub clip: Option<f64>,
    pub out: Option<PathBuf>,
    pub extended: Option<bool>,
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set in `flags` win over fields set here.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            p: flags.p.or(self.p),
            schedule: flags.schedule.or(self.schedule),
            runs: flags.runs.or(self.runs),
            samples: flags.samples.or(self.samples),
            seed: flags.seed.or(self.seed),
            estimators: flags.estimators.or(self.estimators),
            lambda_hat: flags.lambda_hat.or(self.lambda_hat),
            clip: flags.clip.or(self.clip),
            out: flags.out.or(self.out),
            extended: flags.extended.or(self.extended),
        }
    }
}
