use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// What was run, with which seeds, and what it produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Flat `key = value` text; feeding it back through `--config` re-runs
    /// the same experiment.
    pub config_snapshot: String,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<PathBuf>,
    pub timings: Vec<Timing>,
}

impl RunManifest {
    pub fn new(command: &str, config_snapshot: String, seeds: Vec<u64>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_snapshot,
            seeds,
            artifacts: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.timings.push(Timing {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    /// Fails if any listed artifact is missing, then writes the manifest.
    pub fn write(&mut self, path: &Path) -> Result<()> {
        if let Some(missing) = self.artifacts.iter().find(|p| !p.is_file()) {
            return Err(Error::io(
                missing.clone(),
                std::io::Error::new(std::io::ErrorKind::NotFound, "artifact missing at manifest time"),
            ));
        }
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}
