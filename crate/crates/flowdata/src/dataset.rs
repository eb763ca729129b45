//! Dataset ingestion and split views over the canonical on-disk layout
//! `<root>/manifest.json` plus `<root>/<class>/<day>/<index>.flow`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::format::{read_flow_file, write_flow_file};
use crate::frame::{day_dir_name, parse_day_dir, ClassLabel, FlowFrame, FlowStack, SplitRole};
use crate::manifest::{ClassCounts, DatasetManifest, NormConstants, SplitDef, StackRef};
use crate::normalize::normalize_stack;

/// A stack before any split role or normalization is attached.
#[derive(Debug, Clone)]
pub struct RawStack {
    pub class: ClassLabel,
    pub day: i32,
    /// Stack index within its day.
    pub index: usize,
    pub frames: Vec<FlowFrame>,
}

impl RawStack {
    pub fn stack_ref(&self) -> StackRef {
        StackRef { day: self.day, index: self.index }
    }
}

#[derive(Debug)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: DatasetManifest,
    stable: Vec<RawStack>,
    unstable: Vec<RawStack>,
}

/// One split's normalized view: stable train stacks, and the shared test
/// set of held-out stable stacks plus every unstable stack.
#[derive(Debug)]
pub struct SplitView {
    pub split_id: usize,
    pub constants: NormConstants,
    pub train: Vec<FlowStack>,
    pub test: Vec<FlowStack>,
}

/// Number of complete m-stacks in a day of `frames` samples.
pub fn stack_count(frames: usize, m: usize) -> usize {
    frames / m
}

impl Dataset {
    /// Reads the manifest and every flow file under `root`. Normalization
    /// constants are recomputed from each split's stable-train portion;
    /// stored constants are ignored apart from a divergence warning.
    pub fn ingest(root: &Path, m: usize) -> Result<Dataset> {
        let manifest = DatasetManifest::load(root)?;
        if manifest.m != m {
            return Err(Error::Manifest(format!(
                "dataset at {} was materialized for m={}, requested m={}",
                root.display(),
                manifest.m,
                m
            )));
        }
        let mut timestamp = 0usize;
        let mut stable = Vec::new();
        let mut unstable = Vec::new();
        let mut day_frames: BTreeMap<i32, (ClassLabel, Vec<(usize, PathBuf)>)> = BTreeMap::new();
        for class in [ClassLabel::Stable, ClassLabel::Unstable] {
            let class_dir = root.join(class.dir_name());
            if !class_dir.is_dir() {
                continue;
            }
            for entry in fs::read_dir(&class_dir)? {
                let entry = entry?;
                let name = entry.file_name().to_string_lossy().to_string();
                let day = parse_day_dir(&name).ok_or_else(|| {
                    Error::ingest(entry.path(), "directory is not a day label like D-2 or D+3")
                })?;
                let mut files = Vec::new();
                for f in fs::read_dir(entry.path())? {
                    let f = f?;
                    let path = f.path();
                    if path.extension().and_then(|e| e.to_str()) != Some("flow") {
                        continue;
                    }
                    let stem = path
                        .file_stem()
                        .and_then(|s| s.to_str())
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| {
                            Error::ingest(&path, "flow file name must be a frame index")
                        })?;
                    files.push((stem, path));
                }
                files.sort();
                day_frames.insert(day, (class, files));
            }
        }

        for (day, (class, files)) in &day_frames {
            let remainder = files.len() % m;
            if remainder != 0 {
                warn!(
                    "day {}: {} trailing frame(s) dropped (frame count {} not divisible by m={})",
                    day_dir_name(*day),
                    remainder,
                    files.len(),
                    m
                );
            }
            let mut frames = Vec::with_capacity(files.len());
            for (_, path) in files {
                let (h, v) = read_flow_file(path)?;
                frames.push(FlowFrame::new(h, v, timestamp, *day)?);
                timestamp += 1;
            }
            let usable = frames.len() - remainder;
            frames.truncate(usable);
            for (index, chunk) in frames.chunks_exact(m).enumerate() {
                let stack = RawStack {
                    class: *class,
                    day: *day,
                    index,
                    frames: chunk.to_vec(),
                };
                match class {
                    ClassLabel::Stable => stable.push(stack),
                    ClassLabel::Unstable => unstable.push(stack),
                }
            }
        }

        let counts = ClassCounts {
            stable_stacks: stable.len(),
            unstable_stacks: unstable.len(),
            stable_frames: stable.len() * m,
            unstable_frames: unstable.len() * m,
        };
        if counts.stable_stacks != manifest.counts.stable_stacks
            || counts.unstable_stacks != manifest.counts.unstable_stacks
        {
            return Err(Error::Manifest(format!(
                "manifest counts ({} stable / {} unstable stacks) disagree with files \
                 ({} / {})",
                manifest.counts.stable_stacks,
                manifest.counts.unstable_stacks,
                counts.stable_stacks,
                counts.unstable_stacks
            )));
        }

        let mut dataset = Dataset {
            root: root.to_path_buf(),
            manifest,
            stable,
            unstable,
        };
        for i in 0..dataset.manifest.splits.len() {
            let computed = dataset.compute_constants(i)?;
            let stored = dataset.manifest.splits[i].normalization;
            if let Some(stored) = stored {
                if !constants_close(&stored, &computed) {
                    warn!("split {i}: stored normalization constants diverge from recomputed ones");
                }
            }
            dataset.manifest.splits[i].normalization = Some(computed);
        }
        Ok(dataset)
    }

    pub fn stable_stacks(&self) -> &[RawStack] {
        &self.stable
    }

    pub fn unstable_stacks(&self) -> &[RawStack] {
        &self.unstable
    }

    /// Every frame of both classes in timestamp order.
    pub fn all_frames(&self) -> Vec<&FlowFrame> {
        let mut frames: Vec<&FlowFrame> = self
            .stable
            .iter()
            .chain(&self.unstable)
            .flat_map(|s| s.frames.iter())
            .collect();
        frames.sort_by_key(|f| f.timestamp);
        frames
    }

    fn find_stable(&self, r: StackRef) -> Result<&RawStack> {
        self.stable
            .iter()
            .find(|s| s.day == r.day && s.index == r.index)
            .ok_or_else(|| {
                Error::Manifest(format!(
                    "split references stable stack {}/{} which does not exist",
                    day_dir_name(r.day),
                    r.index
                ))
            })
    }

    /// Min/max per channel kind over the split's stable-train frames only.
    pub fn compute_constants(&self, split_id: usize) -> Result<NormConstants> {
        let split = self.split_def(split_id)?;
        let mut c = NormConstants {
            h_min: f64::INFINITY,
            h_max: f64::NEG_INFINITY,
            v_min: f64::INFINITY,
            v_max: f64::NEG_INFINITY,
        };
        for r in &split.train {
            let stack = self.find_stable(*r)?;
            for frame in &stack.frames {
                for &x in &frame.horizontal {
                    c.h_min = c.h_min.min(x);
                    c.h_max = c.h_max.max(x);
                }
                for &x in &frame.vertical {
                    c.v_min = c.v_min.min(x);
                    c.v_max = c.v_max.max(x);
                }
            }
        }
        if !c.h_min.is_finite() {
            return Err(Error::Validation(format!(
                "split {split_id} has no training frames"
            )));
        }
        Ok(c)
    }

    pub fn split_def(&self, split_id: usize) -> Result<&SplitDef> {
        self.manifest
            .splits
            .get(split_id)
            .ok_or_else(|| Error::Validation(format!("no split {split_id}")))
    }

    /// Materializes the normalized train/test stacks for one split.
    pub fn split_view(&self, split_id: usize) -> Result<SplitView> {
        let constants = self
            .split_def(split_id)?
            .normalization
            .ok_or_else(|| Error::Validation("normalization constants missing".into()))?;
        let split = self.split_def(split_id)?;
        let mut train = Vec::with_capacity(split.train.len());
        for r in &split.train {
            let s = self.find_stable(*r)?;
            train.push(self.build_stack(s, SplitRole::Train, &constants)?);
        }
        let mut test = Vec::with_capacity(split.test.len() + self.unstable.len());
        for r in &split.test {
            let s = self.find_stable(*r)?;
            test.push(self.build_stack(s, SplitRole::Test, &constants)?);
        }
        for s in &self.unstable {
            test.push(self.build_stack(s, SplitRole::Test, &constants)?);
        }
        Ok(SplitView {
            split_id,
            constants,
            train,
            test,
        })
    }

    fn build_stack(
        &self,
        raw: &RawStack,
        role: SplitRole,
        constants: &NormConstants,
    ) -> Result<FlowStack> {
        let tensor = normalize_stack(&raw.frames, constants)?;
        Ok(FlowStack {
            frames: raw.frames.clone(),
            tensor,
            class_label: raw.class,
            day_label: raw.day,
            split_role: role,
        })
    }
}

fn constants_close(a: &NormConstants, b: &NormConstants) -> bool {
    // Files hold f32, so recomputation from disk matches to f32 precision.
    let tol = 1e-6;
    (a.h_min - b.h_min).abs() < tol
        && (a.h_max - b.h_max).abs() < tol
        && (a.v_min - b.v_min).abs() < tol
        && (a.v_max - b.v_max).abs() < tol
}

/// Writes a generated dataset (day label, class, frames) to the canonical
/// layout and returns its manifest.
pub fn write_dataset(
    root: &Path,
    days: &[(i32, ClassLabel, Vec<(Vec<f64>, Vec<f64>)>)],
    m: usize,
    split_seed: u64,
    chronological: bool,
) -> Result<DatasetManifest> {
    fs::create_dir_all(root)?;
    let mut stable_refs = Vec::new();
    let mut counts = ClassCounts {
        stable_stacks: 0,
        unstable_stacks: 0,
        stable_frames: 0,
        unstable_frames: 0,
    };
    let mut day_labels = Vec::new();
    for (day, class, frames) in days {
        day_labels.push(*day);
        let dir = root.join(class.dir_name()).join(day_dir_name(*day));
        fs::create_dir_all(&dir)?;
        for (i, (h, v)) in frames.iter().enumerate() {
            write_flow_file(&dir.join(format!("{i}.flow")), h, v)?;
        }
        let stacks = stack_count(frames.len(), m);
        match class {
            ClassLabel::Stable => {
                counts.stable_stacks += stacks;
                counts.stable_frames += stacks * m;
                for index in 0..stacks {
                    stable_refs.push(StackRef { day: *day, index });
                }
            }
            ClassLabel::Unstable => {
                counts.unstable_stacks += stacks;
                counts.unstable_frames += stacks * m;
            }
        }
    }
    day_labels.sort();
    let splits = crate::manifest::make_splits(&stable_refs, split_seed, chronological)?;
    let mut manifest = DatasetManifest {
        version: 1,
        m,
        day_labels,
        counts,
        splits,
        split_seed,
        chronological,
    };
    manifest.save(root)?;

    // Fill stored normalization constants from the files just written.
    let dataset = Dataset::ingest(root, m)?;
    manifest = dataset.manifest.clone();
    manifest.save(root)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_shaped_counts() {
        // 1,333m stable and 11,984m unstable flows with m = 2 give 1,333
        // stable and 11,984 unstable stacks.
        assert_eq!(stack_count(1_333 * 2, 2), 1_333);
        assert_eq!(stack_count(11_984 * 2, 2), 11_984);
        for m in [1usize, 2, 4] {
            assert_eq!(stack_count(1_333 * m, m), 1_333);
            assert_eq!(stack_count(11_984 * m, m), 11_984);
        }
    }
}
