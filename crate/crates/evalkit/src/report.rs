//! Evaluation report: per-split AUC per method, three-split aggregation,
//! per-window AUC with significance marks against the DSVDD reference,
//! and the distribution exports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auc::mean_std;
use crate::error::{Error, Result};
use crate::harness::MethodScores;
use crate::histogram::Histogram;
use crate::pipeline::IoGenChain;
use crate::stats::welch_t_test;
use crate::svg::{histogram_chart, line_chart, LineSeries};
use crate::windows::{windowed_auc, DayWindow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub per_split_auc: Vec<f64>,
    pub mean_auc: f64,
    pub std_auc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Best-threshold accuracy, reported for the thresholding baselines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_threshold_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCell {
    pub per_split: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    /// Welch two-sided p-value of the three split AUCs against DSVDD's;
    /// flagged significant below 0.05. Low power at n = 3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_vs_dsvdd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significant_vs_dsvdd: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window: DayWindow,
    pub cells: BTreeMap<String, WindowCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub m: usize,
    pub dataset_root: String,
    pub methods: Vec<MethodReport>,
    pub windows: Vec<WindowReport>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Aggregates per-split method scores into the comparison table.
pub fn build_method_reports(per_split: &[Vec<MethodScores>]) -> Result<Vec<MethodReport>> {
    let mut by_method: BTreeMap<String, (Vec<f64>, Option<String>, Vec<f64>)> = BTreeMap::new();
    for split_scores in per_split {
        for ms in split_scores {
            let a = crate::auc::auc(&ms.samples)?;
            let entry = by_method
                .entry(ms.method.clone())
                .or_insert_with(|| (Vec::new(), ms.detail.clone(), Vec::new()));
            entry.0.push(a);
            if matches!(ms.method.as_str(), "ofw" | "dcae") {
                entry.2.push(crate::auc::best_threshold_accuracy(&ms.samples)?.0);
            }
        }
    }
    let mut out = Vec::new();
    for method in crate::harness::METHOD_ORDER {
        if let Some((aucs, detail, accs)) = by_method.get(method) {
            let (mean, std) = mean_std(aucs);
            out.push(MethodReport {
                method: method.to_string(),
                per_split_auc: aucs.clone(),
                mean_auc: mean,
                std_auc: std,
                detail: detail.clone(),
                best_threshold_accuracy: if accs.is_empty() {
                    None
                } else {
                    Some(mean_std(accs).0)
                },
            });
        }
    }
    Ok(out)
}

/// Per-window aggregation plus Welch significance marks against DSVDD.
pub fn build_window_reports(
    per_split: &[Vec<MethodScores>],
    windows: &[DayWindow],
) -> Result<Vec<WindowReport>> {
    // window index -> method -> per-split Option<auc>
    let mut table: Vec<BTreeMap<String, Vec<Option<f64>>>> =
        vec![BTreeMap::new(); windows.len()];
    for split_scores in per_split {
        for ms in split_scores {
            let per_window = windowed_auc(&ms.samples, windows)?;
            for (wi, (_, value)) in per_window.into_iter().enumerate() {
                table[wi].entry(ms.method.clone()).or_default().push(value);
            }
        }
    }
    let mut out = Vec::new();
    for (wi, window) in windows.iter().enumerate() {
        let dsvdd_values: Option<Vec<f64>> = table[wi]
            .get("dsvdd")
            .map(|v| v.iter().flatten().copied().collect());
        let mut cells = BTreeMap::new();
        for (method, values) in &table[wi] {
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let (mean, std) = if present.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&present);
                (Some(m), Some(s))
            };
            let (p, sig) = match (&dsvdd_values, method.as_str(), present.len()) {
                (Some(reference), m, n) if m != "dsvdd" && n >= 2 && reference.len() >= 2 => {
                    let r = welch_t_test(&present, reference);
                    (Some(r.p_two_sided), Some(r.p_two_sided < 0.05))
                }
                _ => (None, None),
            };
            cells.insert(
                method.clone(),
                WindowCell {
                    per_split: values.clone(),
                    mean,
                    std,
                    p_vs_dsvdd: p,
                    significant_vs_dsvdd: sig,
                },
            );
        }
        out.push(WindowReport { window: *window, cells });
    }
    Ok(out)
}

pub fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Evaluation(format!("report encode: {e}")))?;
    fs::write(dir.join("report.json"), json)?;

    let mut csv = String::from("method,mean_auc,std_auc,split0,split1,split2,detail,best_threshold_accuracy\n");
    for m in &report.methods {
        let splits: Vec<String> = m.per_split_auc.iter().map(|v| format!("{v:.6}")).collect();
        csv.push_str(&format!(
            "{},{:.6},{:.6},{},{},{}\n",
            m.method,
            m.mean_auc,
            m.std_auc,
            splits.join(","),
            m.detail.clone().unwrap_or_default(),
            m.best_threshold_accuracy
                .map(|a| format!("{a:.6}"))
                .unwrap_or_default(),
        ));
    }
    fs::write(dir.join("report.csv"), csv)?;

    let mut wcsv = String::from("window,method,mean_auc,std_auc,p_vs_dsvdd,significant\n");
    for w in &report.windows {
        for (method, cell) in &w.cells {
            wcsv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                w.window.label(),
                method,
                cell.mean.map(|v| format!("{v:.6}")).unwrap_or_default(),
                cell.std.map(|v| format!("{v:.6}")).unwrap_or_default(),
                cell.p_vs_dsvdd.map(|v| format!("{v:.4}")).unwrap_or_default(),
                cell.significant_vs_dsvdd
                    .map(|s| if s { "*" } else { "" })
                    .unwrap_or(""),
            ));
        }
    }
    fs::write(dir.join("windows.csv"), wcsv)?;

    // Fig-5-shaped chart: per-method mean AUC over window start day.
    let mut series = Vec::new();
    for method in crate::harness::METHOD_ORDER {
        let points: Vec<(f64, f64)> = report
            .windows
            .iter()
            .filter_map(|w| {
                w.cells
                    .get(method)
                    .and_then(|c| c.mean)
                    .map(|m| (w.window.start as f64, m))
            })
            .collect();
        if !points.is_empty() {
            series.push(LineSeries { label: method.to_string(), points });
        }
    }
    if !series.is_empty() {
        fs::write(
            dir.join("windowed_auc.svg"),
            line_chart("AUC by temporal window", "window start day", "AUC", &series),
        )?;
    }
    Ok(())
}

/// Distance and likelihood populations for the distribution figures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionExport {
    /// Group -> squared distances to the center, normalized to [0, 1] by
    /// the global maximum.
    pub distances: BTreeMap<String, Vec<f64>>,
    /// Group -> classifier likelihoods.
    pub likelihoods: BTreeMap<String, Vec<f64>>,
}

/// Collects the four groups (synthetic from both generators, stable test,
/// unstable test) in DSVDD feature space.
pub fn export_distributions(
    chain: &IoGenChain,
    gen: &baselines::GenBaseline,
    test: &[flowdata::FlowStack],
    n_synthetic: usize,
    noise_rng: &mut ChaCha8Rng,
) -> Result<DistributionExport> {
    use occmodels::iogen::sample_noise;
    use occmodels::svdd_score;

    let enc = &chain.dsvdd.encoder;
    let center = &chain.dsvdd.sphere.center;
    let mut distances: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut likelihoods: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    let push = |dist: &mut BTreeMap<String, Vec<f64>>,
                    lik: &mut BTreeMap<String, Vec<f64>>,
                    group: &str,
                    tensor: &ndcompute::Tensor|
     -> Result<()> {
        let d = svdd_score(enc, center, tensor)?;
        let feat = enc.infer(tensor)?;
        let l = chain.classifier.predict_feature(feat.data())?;
        dist.entry(group.to_string()).or_default().push(d);
        lik.entry(group.to_string()).or_default().push(l);
        Ok(())
    };

    for _ in 0..n_synthetic {
        let z = sample_noise(chain.iogen.sigma, noise_rng);
        let fake = chain.iogen.generate(&z)?;
        push(&mut distances, &mut likelihoods, "iogen_synthetic", &fake)?;
        let z = sample_noise(gen.gan.sigma, noise_rng);
        let fake = gen.gan.generate(&z)?;
        push(&mut distances, &mut likelihoods, "gen_synthetic", &fake)?;
    }
    for stack in test {
        let group = match stack.class_label {
            flowdata::ClassLabel::Stable => "stable",
            flowdata::ClassLabel::Unstable => "unstable",
        };
        push(&mut distances, &mut likelihoods, group, &stack.tensor)?;
    }

    // Normalize distances to [0, 1] by the global max.
    let max = distances
        .values()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for values in distances.values_mut() {
        for v in values.iter_mut() {
            *v /= max;
        }
    }
    Ok(DistributionExport { distances, likelihoods })
}

pub fn write_distributions(dir: &Path, name: &str, export: &DistributionExport) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (stem, table, xlabel) in [
        ("distances", &export.distances, "normalized distance to center"),
        ("likelihoods", &export.likelihoods, "predicted likelihood of instability"),
    ] {
        let mut csv = String::from("group,value\n");
        for (group, values) in table {
            for v in values {
                csv.push_str(&format!("{group},{v}\n"));
            }
        }
        fs::write(dir.join(format!("{name}_{stem}.csv")), csv)?;
        let groups: Vec<(String, Histogram)> = table
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(g, v)| (g.clone(), Histogram::build(v)))
            .collect();
        fs::write(
            dir.join(format!("{name}_{stem}.svg")),
            histogram_chart(stem, xlabel, &groups),
        )?;
    }
    Ok(())
}

/// Median of a sample set; used for the distribution-ordering checks.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Squared-distance scores of a stack population, for ordering checks.
pub fn svdd_scores_of(
    chain: &IoGenChain,
    stacks: &[&flowdata::FlowStack],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(stacks.len());
    for s in stacks {
        out.push(occmodels::svdd_score(
            &chain.dsvdd.encoder,
            &chain.dsvdd.sphere.center,
            &s.tensor,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auc::ScoredSample;

    #[test]
    fn median_of_odd_and_even_sets() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn method_reports_aggregate_three_splits() {
        let mk = |split: usize, score_gap: f64| -> MethodScores {
            let mut samples = Vec::new();
            for i in 0..10 {
                samples.push(ScoredSample::new(i as f64 * 0.01, 0, -1, split));
                samples.push(ScoredSample::new(i as f64 * 0.01 + score_gap, 1, 3, split));
            }
            MethodScores { method: "dsvdd".into(), detail: None, samples }
        };
        let per_split = vec![vec![mk(0, 1.0)], vec![mk(1, 1.0)], vec![mk(2, 0.0)]];
        let reports = build_method_reports(&per_split).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.per_split_auc.len(), 3);
        let (mean, std) = mean_std(&r.per_split_auc);
        assert_eq!(r.mean_auc, mean);
        assert_eq!(r.std_auc, std);
    }
}
