//! Output directories and the manifest written next to every output set.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use snn_core::config::SimulatorConfig;
use snn_core::engine::config_hash;

use crate::Failure;

pub const MANIFEST: &str = "manifest.json";

/// Everything needed to reproduce an output set. Feeding the file back via
/// `--config` re-runs with the same resolved config.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: SimulatorConfig,
    pub inputs: Vec<String>,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub version: String,
    /// Hex SHA-256 of the compact JSON serialization of `config`.
    pub config_hash: String,
}

pub struct OutputSet {
    dir: PathBuf,
    outputs: Vec<String>,
}

pub fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::Validation(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(
        mut self,
        command: &str,
        config: &SimulatorConfig,
        inputs: Vec<String>,
    ) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: command.to_string(),
            config: config.clone(),
            inputs,
            outputs: self.outputs.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(config)?,
        };
        self.write_json(MANIFEST, &manifest)
    }
}
