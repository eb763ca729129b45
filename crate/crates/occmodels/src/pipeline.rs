//! Pipeline state file: which stages completed, under which config hash,
//! and the digests of the upstream artifacts they were built from. Lets
//! downstream commands detect stale or missing prerequisites.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STATE_FILE: &str = "pipeline.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    pub artifact_digest: String,
    /// Upstream stage name -> the artifact digest it was trained against.
    pub upstream: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PipelineState {
    pub stages: BTreeMap<String, StageRecord>,
}

impl PipelineState {
    pub fn load(dir: &Path) -> Result<PipelineState> {
        let path = dir.join(STATE_FILE);
        if !path.exists() {
            return Ok(PipelineState::default());
        }
        let bytes = fs::read(&path)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::Validation(format!("corrupt {}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Validation(format!("state encode: {e}")))?;
        fs::write(dir.join(STATE_FILE), json)?;
        Ok(())
    }

    pub fn record(&mut self, stage: &str, record: StageRecord) {
        self.stages.insert(stage.to_string(), record);
    }

    pub fn get(&self, stage: &str) -> Option<&StageRecord> {
        self.stages.get(stage)
    }
}
