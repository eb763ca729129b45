//! Run configuration: a single JSON document with OCCFLOW_* environment
//! overrides. Every random stream is seeded explicitly; the config hash
//! (out_dir excluded) ties reports and artifacts back to the exact
//! settings that produced them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use evalkit::{DayWindow, StageConfigs};
use flowdata::SimScenario;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const ENV_PREFIX: &str = "OCCFLOW_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    /// Stable-class split assignment.
    pub data_split: u64,
    /// Network initialization and training-time shuffling/noise.
    pub model_init: u64,
    /// Post-training noise draws (distribution exports, gallery).
    pub noise: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { data_split: 7, model_init: 11, noise: 13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub windows: Vec<DayWindow>,
    pub jobs: usize,
    /// Synthetic samples per generator for the distribution exports.
    pub distribution_samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            windows: evalkit::default_windows(),
            jobs: 1,
            distribution_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset_root: PathBuf,
    pub m: usize,
    pub out_dir: PathBuf,
    pub seeds: Seeds,
    pub stages: StageConfigs,
    pub eval: EvalConfig,
    pub sim: SimScenario,
    /// Chronological instead of random stable-class splits.
    pub chronological_splits: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset_root: PathBuf::from("data/synthetic"),
            m: 2,
            out_dir: PathBuf::from("runs/synthetic"),
            seeds: Seeds::default(),
            stages: StageConfigs::default(),
            eval: EvalConfig::default(),
            sim: SimScenario::default(),
            chronological_splits: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(CliError::Config("m must be positive".into()));
        }
        if self.stages.iogen.lambda_feat < 0.0 {
            return Err(CliError::Config("lambda_feat must be non-negative".into()));
        }
        if self.sim.frames_per_day % self.m != 0 {
            log::warn!(
                "frames_per_day {} not divisible by m {}; trailing frames will drop",
                self.sim.frames_per_day,
                self.m
            );
        }
        Ok(())
    }

    /// Loads the config file (or defaults when absent), then applies
    /// OCCFLOW_* environment overrides. Key paths use double underscores:
    /// OCCFLOW_STAGES__DCAE__EPOCHS=3 sets stages.dcae.epochs.
    pub fn load(path: Option<&Path>, env: &BTreeMap<String, String>) -> Result<RunConfig> {
        let mut value = match path {
            Some(p) => {
                let bytes = fs::read(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::Config(format!("bad config {}: {e}", p.display())))?
            }
            None => serde_json::to_value(RunConfig::default()).expect("default config"),
        };
        for (key, raw) in env {
            let Some(path_part) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let segments: Vec<String> = path_part
                .split("__")
                .map(|s| s.to_ascii_lowercase())
                .collect();
            let parsed: serde_json::Value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.clone()));
            set_path(&mut value, &segments, parsed)?;
        }
        let config: RunConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("config does not type-check: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_process_env(path: Option<&Path>) -> Result<RunConfig> {
        let env: BTreeMap<String, String> = std::env::vars()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        Self::load(path, &env)
    }

    /// SHA-256 over the canonical JSON with out_dir removed, so the same
    /// experiment written to two directories hashes identically.
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
        }
        let canonical = serde_json::to_vec(&value).expect("canonical json");
        let mut hasher = Sha256::new();
        hasher.update(&canonical);
        occmodels::bundle::hex_string(&hasher.finalize())
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn split_seed_base(&self, split_id: usize) -> u64 {
        occmodels::config::subseed(self.seeds.model_init, &format!("split{split_id}"))
    }
}

fn set_path(
    value: &mut serde_json::Value,
    segments: &[String],
    leaf: serde_json::Value,
) -> Result<()> {
    let mut cursor = value;
    for (i, seg) in segments.iter().enumerate() {
        let map = cursor.as_object_mut().ok_or_else(|| {
            CliError::Config(format!("override path {} crosses a non-object", segments.join(".")))
        })?;
        if i + 1 == segments.len() {
            map.insert(seg.clone(), leaf);
            return Ok(());
        }
        cursor = map
            .entry(seg.clone())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_hash_ignores_out_dir() {
        let a = RunConfig::default();
        let json = a.to_pretty_json();
        let b: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);

        let mut c = a.clone();
        c.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.config_hash(), c.config_hash());

        let mut d = a.clone();
        d.m = 4;
        assert_ne!(a.config_hash(), d.config_hash());
    }

    #[test]
    fn env_overrides_apply_by_path() {
        let mut env = BTreeMap::new();
        env.insert("OCCFLOW_M".to_string(), "4".to_string());
        env.insert("OCCFLOW_SEEDS__MODEL_INIT".to_string(), "99".to_string());
        env.insert(
            "OCCFLOW_STAGES__DCAE__EPOCHS".to_string(),
            "3".to_string(),
        );
        env.insert(
            "OCCFLOW_DATASET_ROOT".to_string(),
            "elsewhere/data".to_string(),
        );
        let cfg = RunConfig::load(None, &env).unwrap();
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.seeds.model_init, 99);
        assert_eq!(cfg.stages.dcae.epochs, 3);
        assert_eq!(cfg.dataset_root, PathBuf::from("elsewhere/data"));
    }

    #[test]
    fn bad_config_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, b"{ not json").unwrap();
        let err = RunConfig::load(Some(&path), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }
}
