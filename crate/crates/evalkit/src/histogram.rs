//! Histograms with Freedman-Diaconis binning capped at 50 bins.

use serde::{Deserialize, Serialize};

pub const MAX_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// bin i covers [edges[i], edges[i+1]); the last bin is closed.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn build(values: &[f64]) -> Histogram {
        assert!(!values.is_empty(), "histogram of an empty set");
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min = sorted[0];
        let max = *sorted.last().unwrap();
        if min == max {
            return Histogram { edges: vec![min, max], counts: vec![values.len()] };
        }
        let n = sorted.len() as f64;
        let q1 = quartile(&sorted, 0.25);
        let q3 = quartile(&sorted, 0.75);
        let iqr = q3 - q1;
        let width = 2.0 * iqr / n.cbrt();
        let bins = if width > 0.0 {
            (((max - min) / width).ceil() as usize).clamp(1, MAX_BINS)
        } else {
            MAX_BINS.min(sorted.len())
        };
        let step = (max - min) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| min + step * i as f64).collect();
        let mut counts = vec![0usize; bins];
        for &v in values {
            let mut idx = ((v - min) / step) as usize;
            if idx >= bins {
                idx = bins - 1;
            }
            counts[idx] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,bin_end,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c));
        }
        out
    }
}

fn quartile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] * (hi as f64 - rank) + sorted[hi] * (rank - lo as f64)
    }
}
