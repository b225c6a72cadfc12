//! Output-tree manifest: the provenance record accompanying every run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

/// One fitted (or simulated) phase and its files, paths relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    /// 1-based phase number.
    pub index: usize,
    /// 1-based start day within the original series.
    pub start: usize,
    pub len: usize,
    pub trace_files: Vec<String>,
    pub checkpoint_files: Vec<String>,
}

/// Everything needed to reproduce and re-read a run's outputs: command,
/// seed, config hash, the fully resolved configuration, and per-phase file
/// lists. Deliberately carries no timestamps so output trees are
/// byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_fingerprint: String,
    pub config: serde_json::Value,
    /// Smoothing window actually applied (0 = none).
    pub smoothing_window: usize,
    pub allow_real_counts: bool,
    pub phase_boundaries: Vec<usize>,
    pub phases: Vec<PhaseEntry>,
    /// Data files written or consumed, relative to the manifest directory.
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, fingerprint: String, config: serde_json::Value) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config_fingerprint: fingerprint,
            config,
            smoothing_window: 0,
            allow_real_counts: false,
            phase_boundaries: Vec::new(),
            phases: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        super::atomic_write(&dir.join("manifest.json"), text.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.json"))?;
        Ok(serde_json::from_str(&text)?)
    }
}
