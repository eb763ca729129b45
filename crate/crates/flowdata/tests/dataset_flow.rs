//! End-to-end dataset checks: materialize a scenario, ingest it back,
//! and verify split structure, normalization provenance and determinism.

use std::fs;
use std::path::Path;

use flowdata::{
    materialize, ClassLabel, Dataset, DaySpec, SimScenario, SplitRole, GRID_LEN,
};

fn tiny_scenario() -> SimScenario {
    SimScenario {
        agent_count: 10,
        days: vec![
            DaySpec::new(-2, 0.0),
            DaySpec::new(-1, 0.0),
            DaySpec::new(1, 1.0),
            DaySpec::new(2, 0.4),
        ],
        frames_per_day: 10,
        seed: 7,
        ..SimScenario::default()
    }
}

fn dir_digest(root: &Path) -> Vec<(String, u64)> {
    fn walk(dir: &Path, base: &Path, out: &mut Vec<(String, u64)>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(&path, base, out);
            } else {
                let bytes = fs::read(&path).unwrap();
                let mut h = 0xcbf29ce484222325u64;
                for b in bytes {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
                out.push((path.strip_prefix(base).unwrap().display().to_string(), h));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn ten_stable_frames_give_four_train_one_test_per_split() {
    let dir = tempfile::tempdir().unwrap();
    let sc = SimScenario {
        days: vec![
            DaySpec::new(-1, 0.0),
            DaySpec::new(1, 1.0),
        ],
        frames_per_day: 10,
        ..tiny_scenario()
    };
    let manifest = materialize(&sc, 2, 3, false, dir.path()).unwrap();
    assert_eq!(manifest.counts.stable_stacks, 5);
    for split in &manifest.splits {
        assert_eq!(split.train.len(), 4);
        assert_eq!(split.test.len(), 1);
    }
}

#[test]
fn ingest_round_trip_matches_manifest_and_roles() {
    let dir = tempfile::tempdir().unwrap();
    let sc = tiny_scenario();
    let manifest = materialize(&sc, 2, 5, false, dir.path()).unwrap();
    let dataset = Dataset::ingest(dir.path(), 2).unwrap();
    assert_eq!(dataset.manifest.counts, manifest.counts);
    assert_eq!(dataset.stable_stacks().len(), 10);
    assert_eq!(dataset.unstable_stacks().len(), 10);

    for split_id in 0..3 {
        let view = dataset.split_view(split_id).unwrap();
        assert_eq!(view.train.len(), 8);
        assert_eq!(view.test.len(), 2 + 10);
        for s in &view.train {
            assert_eq!(s.class_label, ClassLabel::Stable);
            assert_eq!(s.split_role, SplitRole::Train);
            assert_eq!(s.m(), 2);
            assert_eq!(s.tensor.shape(), &[64, 64, 4]);
            assert!(s.tensor.data().iter().all(|&x| (-1.0..=1.0).contains(&x)));
        }
        // No unstable stack ever carries the train role.
        assert!(view
            .test
            .iter()
            .all(|s| s.split_role == SplitRole::Test));
        assert!(view.train.iter().all(|s| s.class_label == ClassLabel::Stable));
    }
}

#[test]
fn wrong_m_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    materialize(&tiny_scenario(), 2, 5, false, dir.path()).unwrap();
    let err = Dataset::ingest(dir.path(), 4).unwrap_err();
    assert!(err.to_string().contains("m=2"), "{err}");
}

#[test]
fn trailing_frames_are_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let sc = SimScenario { frames_per_day: 11, ..tiny_scenario() };
    let manifest = materialize(&sc, 2, 5, false, dir.path()).unwrap();
    // 11 frames per day yield 5 stacks per day.
    assert_eq!(manifest.counts.stable_stacks, 10);
    let dataset = Dataset::ingest(dir.path(), 2).unwrap();
    assert_eq!(dataset.stable_stacks().len(), 10);
}

#[test]
fn malformed_file_error_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    materialize(&tiny_scenario(), 2, 5, false, dir.path()).unwrap();
    let victim = dir.path().join("stable/D-2/3.flow");
    fs::write(&victim, b"garbage").unwrap();
    let err = Dataset::ingest(dir.path(), 2).unwrap_err();
    assert!(err.to_string().contains("3.flow"), "{err}");
}

#[test]
fn normalization_depends_only_on_stable_train_data() {
    let dir = tempfile::tempdir().unwrap();
    materialize(&tiny_scenario(), 2, 5, false, dir.path()).unwrap();
    let dataset = Dataset::ingest(dir.path(), 2).unwrap();

    // Delete every test file of one split (all unstable files plus the
    // split's held-out stable stacks), then recompute the constants from
    // what remains on disk. They must be identical.
    for split_id in 0..3 {
        let split = dataset.split_def(split_id).unwrap().clone();
        let scratch = tempfile::tempdir().unwrap();
        copy_tree(dir.path(), scratch.path());
        fs::remove_dir_all(scratch.path().join("unstable")).unwrap();
        for r in &split.test {
            let day_dir = scratch
                .path()
                .join("stable")
                .join(flowdata::day_dir_name(r.day));
            for k in 0..2 {
                fs::remove_file(day_dir.join(format!("{}.flow", r.index * 2 + k))).unwrap();
            }
        }
        let (h_min, h_max, v_min, v_max) = scan_stable_min_max(scratch.path(), &split.train);
        let c = dataset.compute_constants(split_id).unwrap();
        assert_eq!(h_min, c.h_min);
        assert_eq!(h_max, c.h_max);
        assert_eq!(v_min, c.v_min);
        assert_eq!(v_max, c.v_max);
    }
}

fn scan_stable_min_max(root: &Path, train: &[flowdata::StackRef]) -> (f64, f64, f64, f64) {
    let (mut hmin, mut hmax, mut vmin, mut vmax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in train {
        for k in 0..2 {
            let path = root
                .join("stable")
                .join(flowdata::day_dir_name(r.day))
                .join(format!("{}.flow", r.index * 2 + k));
            let (h, v) = flowdata::format::read_flow_file(&path).unwrap();
            for x in h {
                hmin = hmin.min(x);
                hmax = hmax.max(x);
            }
            for x in v {
                vmin = vmin.min(x);
                vmax = vmax.max(x);
            }
        }
    }
    (hmin, hmax, vmin, vmax)
}

fn copy_tree(src: &Path, dst: &Path) {
    for entry in fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.path().is_dir() {
            fs::create_dir_all(&to).unwrap();
            copy_tree(&entry.path(), &to);
        } else {
            fs::copy(entry.path(), &to).unwrap();
        }
    }
}

#[test]
fn same_scenario_and_seed_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    materialize(&tiny_scenario(), 2, 5, false, a.path()).unwrap();
    materialize(&tiny_scenario(), 2, 5, false, b.path()).unwrap();
    assert_eq!(dir_digest(a.path()), dir_digest(b.path()));
}

#[test]
fn unstable_burst_raises_the_weight_series() {
    let dir = tempfile::tempdir().unwrap();
    materialize(&tiny_scenario(), 2, 5, false, dir.path()).unwrap();
    let dataset = Dataset::ingest(dir.path(), 2).unwrap();
    let series = flowdata::flow_weight_series(&dataset);
    let stable_mean = mean(series.iter().filter(|p| p.day_label < 0).map(|p| p.weight));
    let unstable_mean = mean(series.iter().filter(|p| p.day_label > 0).map(|p| p.weight));
    assert!(
        unstable_mean > stable_mean,
        "unstable {unstable_mean} <= stable {stable_mean}"
    );
}

#[test]
fn raw_flow_values_survive_the_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let sc = tiny_scenario();
    materialize(&sc, 2, 5, false, dir.path()).unwrap();
    let dataset = Dataset::ingest(dir.path(), 2).unwrap();
    let frames = flowdata::simulate_day(&sc, &sc.days[0]);
    let stack = &dataset.stable_stacks()[0];
    for (i, frame) in stack.frames.iter().enumerate() {
        for p in 0..GRID_LEN {
            assert_eq!(frame.horizontal[p], frames[i].0[p] as f32 as f64);
            assert_eq!(frame.vertical[p], frames[i].1[p] as f32 as f64);
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}
