//! Rank-based (Mann-Whitney) ROC AUC with ties counted as half, plus the
//! O(n^2) pairwise oracle used to verify it and the best-threshold
//! accuracy reported for the thresholding baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    /// Abnormality score; higher should mean more likely unstable.
    pub score: f64,
    /// 0 stable, 1 unstable.
    pub true_class: u8,
    pub day_label: i32,
    pub split_id: usize,
}

impl ScoredSample {
    pub fn new(score: f64, true_class: u8, day_label: i32, split_id: usize) -> ScoredSample {
        ScoredSample { score, true_class, day_label, split_id }
    }
}

fn validate(samples: &[ScoredSample]) -> Result<(usize, usize)> {
    let pos = samples.iter().filter(|s| s.true_class == 1).count();
    let neg = samples.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Evaluation(format!(
            "AUC needs both classes; got {pos} unstable and {neg} stable samples"
        )));
    }
    if samples.iter().any(|s| !s.score.is_finite()) {
        return Err(Error::Evaluation("non-finite score".into()));
    }
    Ok((pos, neg))
}

/// Mann-Whitney AUC from average ranks; ties contribute 1/2.
pub fn auc(samples: &[ScoredSample]) -> Result<f64> {
    let (pos, neg) = validate(samples)?;
    let n = samples.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| samples[a].score.partial_cmp(&samples[b].score).unwrap());

    // Average ranks over tie groups, 1-based.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && samples[order[j + 1]].score == samples[order[i]].score {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if samples[idx].true_class == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let pos = pos as f64;
    let neg = neg as f64;
    Ok((rank_sum_pos - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// Brute-force oracle: fraction of (unstable, stable) pairs ranked
/// correctly, ties counting half. Quadratic; for verification only.
pub fn auc_pairwise_oracle(samples: &[ScoredSample]) -> Result<f64> {
    validate(samples)?;
    let positives: Vec<f64> = samples.iter().filter(|s| s.true_class == 1).map(|s| s.score).collect();
    let negatives: Vec<f64> = samples.iter().filter(|s| s.true_class == 0).map(|s| s.score).collect();
    let mut acc = 0.0;
    for &p in &positives {
        for &q in &negatives {
            acc += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    Ok(acc / (positives.len() * negatives.len()) as f64)
}

/// Best classification accuracy over all score thresholds (predict
/// unstable when score > threshold), with the threshold that achieves it.
pub fn best_threshold_accuracy(samples: &[ScoredSample]) -> Result<(f64, f64)> {
    validate(samples)?;
    let mut sorted: Vec<&ScoredSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.score.partial_cmp(&b.score).unwrap());
    let n = samples.len() as f64;
    let total_pos = sorted.iter().filter(|s| s.true_class == 1).count() as f64;

    // Sweep thresholds between consecutive distinct scores; at threshold
    // t, accuracy = (#unstable above t + #stable at or below t) / n.
    let mut best = (total_pos / n, f64::NEG_INFINITY); // everything above -inf
    let mut stable_below = 0.0;
    let mut pos_below = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].score == sorted[i].score {
            j += 1;
        }
        for s in &sorted[i..=j] {
            if s.true_class == 0 {
                stable_below += 1.0;
            } else {
                pos_below += 1.0;
            }
        }
        let acc = (stable_below + (total_pos - pos_below)) / n;
        if acc > best.0 {
            let thr = if j + 1 < sorted.len() {
                (sorted[j].score + sorted[j + 1].score) / 2.0
            } else {
                sorted[j].score
            };
            best = (acc, thr);
        }
        i = j + 1;
    }
    Ok(best)
}

/// Sample mean and standard deviation (n-1 denominator), the aggregation
/// used for the three-split reporting.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
