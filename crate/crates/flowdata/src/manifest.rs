//! Dataset manifest: counts, m, day labels, the three stable-class split
//! definitions and per-split normalization constants.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPLIT_COUNT: usize = 3;
pub const TRAIN_FRACTION: f64 = 0.8;

/// Reference to one stable stack: the day it belongs to and its stack
/// index within that day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StackRef {
    pub day: i32,
    pub index: usize,
}

/// Affine normalization constants mapping raw flow values into [-1, 1],
/// one min/max pair per channel kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub h_min: f64,
    pub h_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDef {
    pub id: usize,
    /// Stable stacks used for training in this split.
    pub train: Vec<StackRef>,
    /// Stable stacks held out for test. Unstable stacks are always test.
    pub test: Vec<StackRef>,
    /// Computed from the train portion only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormConstants>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub stable_stacks: usize,
    pub unstable_stacks: usize,
    pub stable_frames: usize,
    pub unstable_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub m: usize,
    pub day_labels: Vec<i32>,
    pub counts: ClassCounts,
    pub splits: Vec<SplitDef>,
    pub split_seed: u64,
    #[serde(default)]
    pub chronological: bool,
}

impl DatasetManifest {
    pub fn load(root: &Path) -> Result<DatasetManifest> {
        let path = root.join("manifest.json");
        let bytes = fs::read(&path)
            .map_err(|e| Error::ingest(&path, format!("cannot read manifest: {e}")))?;
        let manifest: DatasetManifest = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, root: &Path) -> Result<()> {
        let path = root.join("manifest.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Manifest(format!("encode: {e}")))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Manifest("m must be positive".into()));
        }
        if self.splits.len() != SPLIT_COUNT {
            return Err(Error::Manifest(format!(
                "expected {SPLIT_COUNT} splits, found {}",
                self.splits.len()
            )));
        }
        if self.day_labels.contains(&0) {
            return Err(Error::Manifest("day label 0 is not a valid sample day".into()));
        }
        let mut test_sets = Vec::new();
        for split in &self.splits {
            let train: BTreeSet<_> = split.train.iter().copied().collect();
            let test: BTreeSet<_> = split.test.iter().copied().collect();
            if train.intersection(&test).next().is_some() {
                return Err(Error::Manifest(format!(
                    "split {} has overlapping train and test stacks",
                    split.id
                )));
            }
            if train.len() + test.len() != self.counts.stable_stacks {
                return Err(Error::Manifest(format!(
                    "split {} covers {} stable stacks, dataset has {}",
                    split.id,
                    train.len() + test.len(),
                    self.counts.stable_stacks
                )));
            }
            test_sets.push(test);
        }
        for i in 0..test_sets.len() {
            for j in i + 1..test_sets.len() {
                if test_sets[i] == test_sets[j] {
                    return Err(Error::Manifest(format!(
                        "splits {i} and {j} are identical; three unique splits required"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds the three 80/20 stable-class splits. Random assignment shuffles
/// under a per-split seed stream; the chronological option rotates
/// contiguous test blocks from the end of the timeline instead.
pub fn make_splits(
    stable_stacks: &[StackRef],
    seed: u64,
    chronological: bool,
) -> Result<Vec<SplitDef>> {
    let n = stable_stacks.len();
    let n_train = (n as f64 * TRAIN_FRACTION).floor() as usize;
    let n_test = n - n_train;
    if n_test == 0 || n_train == 0 {
        return Err(Error::Validation(format!(
            "{n} stable stacks cannot be split {:.0}/{:.0}",
            TRAIN_FRACTION * 100.0,
            (1.0 - TRAIN_FRACTION) * 100.0
        )));
    }
    let mut splits = Vec::with_capacity(SPLIT_COUNT);
    let mut seen: Vec<BTreeSet<StackRef>> = Vec::new();
    for id in 0..SPLIT_COUNT {
        let mut attempt = 0u64;
        let (train, test) = loop {
            let (train, test) = if chronological {
                let hi = n - id * n_test;
                let lo = hi.saturating_sub(n_test);
                let test: Vec<StackRef> = stable_stacks[lo..hi].to_vec();
                let train: Vec<StackRef> = stable_stacks[..lo]
                    .iter()
                    .chain(&stable_stacks[hi..])
                    .copied()
                    .collect();
                (train, test)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((id as u64).wrapping_mul(1000).wrapping_add(attempt));
                let mut order: Vec<StackRef> = stable_stacks.to_vec();
                order.shuffle(&mut rng);
                let test = order.split_off(n_train);
                (order, test)
            };
            let test_set: BTreeSet<StackRef> = test.iter().copied().collect();
            if !seen.contains(&test_set) {
                seen.push(test_set);
                break (train, test);
            }
            attempt += 1;
            if attempt > 100 {
                return Err(Error::Validation(
                    "could not draw three unique splits; dataset too small".into(),
                ));
            }
        };
        let mut train = train;
        let mut test = test;
        train.sort();
        test.sort();
        splits.push(SplitDef {
            id,
            train,
            test,
            normalization: None,
        });
    }
    Ok(splits)
}
