//! Run manifest written next to the CSV outputs.

use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Result, RunError};

/// Provenance of one run. Every CSV the run writes is listed in `files`.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub workers: usize,
    pub entropy_base: u32,
    pub wall_time_s: f64,
    /// Largest cumulative discarded weight over the MPS trajectories.
    pub discarded_weight: Option<f64>,
    pub max_bond_dim: Option<usize>,
    /// Bond updates clipped by a soft `max_bond` cap.
    pub capped_updates: Option<usize>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, workers: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: config.clone(),
            seed: config.seed,
            workers,
            entropy_base: 2,
            wall_time_s: 0.0,
            discarded_weight: None,
            max_bond_dim: None,
            capped_updates: None,
            files: Vec::new(),
        }
    }

    /// Folds in the truncation bookkeeping of one MPS trajectory.
    pub fn record_mps(&mut self, discarded: f64, max_bond: usize, capped: usize) {
        self.discarded_weight = Some(self.discarded_weight.unwrap_or(0.0).max(discarded));
        self.max_bond_dim = Some(self.max_bond_dim.unwrap_or(0).max(max_bond));
        self.capped_updates = Some(self.capped_updates.unwrap_or(0) + capped);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|source| RunError::Io { path: path.into(), source })
    }
}
