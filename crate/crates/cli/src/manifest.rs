//! Run manifests: every output-producing command records what it ran, on
//! which inputs (by digest), with which resolved settings, and how long it
//! took. Wall time aside, a manifest is reproducible.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// SHA-256 digest per input file.
    pub inputs: BTreeMap<String, String>,
    /// Resolved configuration after merging flags over the config file.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

pub struct ManifestBuilder {
    command: String,
    inputs: BTreeMap<String, String>,
    config: serde_json::Value,
    seed: Option<u64>,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            config,
            seed: None,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::read(path)
            .map_err(|e| anyhow::anyhow!("cannot read input `{}`: {e}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(())
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(self, out_dir: &Path) -> anyhow::Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: self.inputs,
            config: self.config,
            seed: self.seed,
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}
