//! Ablation over the stack depth m: the primary chain trained per m per
//! split, reporting mean and std AUC. Stage failures mark the row instead
//! of aborting the table.

use std::path::Path;

use flowdata::Dataset;
use ndcompute::Tensor;
use serde::{Deserialize, Serialize};

use crate::auc::{auc, mean_std};
use crate::error::Result;
use crate::harness::score_test_set;
use crate::pipeline::{train_chain, StageConfigs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub m: usize,
    pub per_split_auc: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Runs the chain for every (m, dataset root) pair. Each dataset must be
/// materialized for its m.
pub fn run_ablation(
    datasets: &[(usize, &Path)],
    cfg: &StageConfigs,
    seed: u64,
    jobs: usize,
) -> Vec<AblationRow> {
    datasets
        .iter()
        .map(|&(m, root)| match ablate_one(m, root, cfg, seed, jobs) {
            Ok(per_split) => {
                let (mean, std) = mean_std(&per_split);
                AblationRow {
                    m,
                    per_split_auc: per_split,
                    mean_auc: Some(mean),
                    std_auc: Some(std),
                    failure: None,
                }
            }
            Err(e) => AblationRow {
                m,
                per_split_auc: Vec::new(),
                mean_auc: None,
                std_auc: None,
                failure: Some(e.to_string()),
            },
        })
        .collect()
}

fn ablate_one(
    m: usize,
    root: &Path,
    cfg: &StageConfigs,
    seed: u64,
    jobs: usize,
) -> Result<Vec<f64>> {
    let dataset = Dataset::ingest(root, m)?;
    let mut per_split = Vec::new();
    for split_id in 0..dataset.manifest.splits.len() {
        let view = dataset.split_view(split_id)?;
        let train: Vec<&Tensor> = view.train.iter().map(|s| &s.tensor).collect();
        let base = occmodels::config::subseed(seed, &format!("split{split_id}"));
        let chain = train_chain(&train, cfg, base)?;
        let scorer = baselines::ClassifierScorer {
            method: "iogen".into(),
            encoder: chain.dsvdd.encoder.clone(),
            classifier: chain.classifier.clone(),
        };
        let samples = score_test_set(&scorer, &view.test, split_id, jobs)?;
        per_split.push(auc(&samples)?);
    }
    Ok(per_split)
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("m,mean_auc,std_auc,per_split,failure\n");
    for r in rows {
        let splits: Vec<String> = r.per_split_auc.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.m,
            r.mean_auc.map(|v| format!("{v:.6}")).unwrap_or_default(),
            r.std_auc.map(|v| format!("{v:.6}")).unwrap_or_default(),
            splits.join(";"),
            r.failure.clone().unwrap_or_default(),
        ));
    }
    out
}
