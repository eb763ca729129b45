//! The optical-flow-weight signal: mean flow magnitude per frame, plus
//! the standardized time series used for the activity plot.

use log::warn;

use crate::dataset::Dataset;
use crate::frame::FlowFrame;

/// Mean magnitude of the flow vectors over all 64x64 locations.
pub fn flow_weight(frame: &FlowFrame) -> f64 {
    let n = frame.horizontal.len() as f64;
    frame
        .horizontal
        .iter()
        .zip(&frame.vertical)
        .map(|(&h, &v)| h.hypot(v))
        .sum::<f64>()
        / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub timestamp: usize,
    pub day_label: i32,
    /// Weight standardized into [0, 1].
    pub weight: f64,
}

/// Nearest-rank percentile over the sorted values, q in (0, 100]. The
/// nearest-rank convention keeps every point of tiny series inside the
/// cut, so standardization only drops genuine extremes.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = (q / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

const OUTLIER_PERCENTILE: f64 = 99.5;

/// Per-frame weights standardized into [0, 1] by the global min and max,
/// where the max is taken after dropping weights above the 99.5th
/// percentile. A degenerate range yields all zeros with a warning.
pub fn flow_weight_series(dataset: &Dataset) -> Vec<SeriesPoint> {
    let frames = dataset.all_frames();
    standardize_series(
        frames
            .iter()
            .map(|f| (f.timestamp, f.day_label, flow_weight(f)))
            .collect(),
    )
}

pub fn standardize_series(raw: Vec<(usize, i32, f64)>) -> Vec<SeriesPoint> {
    if raw.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = raw.iter().map(|r| r.2).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cutoff = percentile(&sorted, OUTLIER_PERCENTILE);
    let min = sorted[0];
    let max = sorted
        .iter()
        .copied()
        .filter(|&w| w <= cutoff)
        .fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range <= f64::EPSILON * min.abs().max(1.0) {
        warn!("flow weight series has a degenerate range; emitting zeros");
        return raw
            .into_iter()
            .map(|(timestamp, day_label, _)| SeriesPoint { timestamp, day_label, weight: 0.0 })
            .collect();
    }
    raw.into_iter()
        .map(|(timestamp, day_label, w)| SeriesPoint {
            timestamp,
            day_label,
            weight: ((w - min) / range).clamp(0.0, 1.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::GRID_LEN;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(h: f64, v: f64) -> FlowFrame {
        FlowFrame::new(vec![h; GRID_LEN], vec![v; GRID_LEN], 0, 1).unwrap()
    }

    #[test]
    fn zero_flow_has_zero_weight() {
        assert_eq!(flow_weight(&frame(0.0, 0.0)), 0.0);
    }

    #[test]
    fn three_four_five() {
        assert!((flow_weight(&frame(3.0, 4.0)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h: Vec<f64> = (0..GRID_LEN).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let v: Vec<f64> = (0..GRID_LEN).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let f = FlowFrame::new(h.clone(), v.clone(), 0, 1).unwrap();
        let mut acc = 0.0;
        for i in 0..GRID_LEN {
            acc += (h[i] * h[i] + v[i] * v[i]).sqrt();
        }
        let expected = acc / GRID_LEN as f64;
        assert!((flow_weight(&f) - expected).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_pixel_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h: Vec<f64> = (0..GRID_LEN).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let v: Vec<f64> = (0..GRID_LEN).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let f = FlowFrame::new(h.clone(), v.clone(), 0, 1).unwrap();
        let w = flow_weight(&f);

        let mut order: Vec<usize> = (0..GRID_LEN).collect();
        order.shuffle(&mut rng);
        let hp: Vec<f64> = order.iter().map(|&i| h[i]).collect();
        let vp: Vec<f64> = order.iter().map(|&i| v[i]).collect();
        let fp = FlowFrame::new(hp, vp, 0, 1).unwrap();
        assert!((flow_weight(&fp) - w).abs() < 1e-12);
    }

    #[test]
    fn two_weights_standardize_to_unit_interval() {
        let s = standardize_series(vec![(0, -1, 2.0), (1, -1, 4.0)]);
        assert_eq!(s[0].weight, 0.0);
        assert_eq!(s[1].weight, 1.0);
    }

    #[test]
    fn degenerate_range_yields_zeros() {
        let s = standardize_series(vec![(0, -1, 3.0), (1, -1, 3.0), (2, 1, 3.0)]);
        assert!(s.iter().all(|p| p.weight == 0.0));
    }

    #[test]
    fn extreme_outlier_is_cut_from_the_max() {
        // 999 ordinary weights plus one huge spike: the spike sits beyond
        // the 99.5th percentile, so the max comes from the bulk and the
        // spike clamps to 1.0 while mid-range values stay near 0.5.
        let mut raw: Vec<(usize, i32, f64)> =
            (0..999).map(|i| (i, 1, (i % 100) as f64 / 100.0)).collect();
        raw.push((999, 1, 1000.0));
        let s = standardize_series(raw);
        assert_eq!(s[999].weight, 1.0);
        let mid = s.iter().find(|p| p.timestamp == 50).unwrap();
        assert!(mid.weight > 0.4 && mid.weight < 0.6, "{}", mid.weight);
    }

    #[test]
    fn percentile_uses_nearest_rank() {
        let v = vec![0.0, 1.0, 2.0, 3.0];
        assert_eq!(percentile(&v, 100.0), 3.0);
        assert_eq!(percentile(&v, 50.0), 1.0);
        assert_eq!(percentile(&v, 99.5), 3.0);
        assert_eq!(percentile(&[2.0, 4.0], 99.5), 4.0);
    }
}
