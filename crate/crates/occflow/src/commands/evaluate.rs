//! Evaluation over all three splits: the comparison table, per-window
//! analysis and the distribution exports.

use std::collections::BTreeMap;

use evalkit::pipeline::{IoGenChain, TrainedSplit};
use evalkit::{
    build_method_reports, build_window_reports, export_distributions, score_split,
    write_distributions, write_report, EvalReport, MethodScores,
};
use flowdata::Dataset;
use occmodels::bundle::{load_classifier, load_dcae, load_dsvdd, load_iogen};
use occmodels::config::subseed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::stages::{load_gen, load_ngen, load_ocsvm, stage_dir, STAGE_ORDER};

pub fn cmd_evaluate(cfg: &RunConfig, dry_run: bool) -> Result<()> {
    if dry_run {
        println!("resolved config:\n{}", cfg.to_pretty_json());
        println!("config hash: {}", cfg.config_hash());
        println!("evaluate needs trained stages: {}", STAGE_ORDER.join(", "));
        return Ok(());
    }
    let dataset = Dataset::ingest(&cfg.dataset_root, cfg.m)?;
    let eval_dir = cfg.out_dir.join("eval");
    std::fs::create_dir_all(&eval_dir)?;

    let mut per_split: Vec<Vec<MethodScores>> = Vec::new();
    for split in 0..dataset.manifest.splits.len() {
        let trained = load_split(cfg, split)?;
        let view = dataset.split_view(split)?;
        let scores = score_split(&trained, &view.test, split, cfg.eval.jobs)
            .map_err(CliError::from)?;
        per_split.push(scores);

        let mut noise_rng =
            ChaCha8Rng::seed_from_u64(subseed(cfg.seeds.noise, &format!("split{split}.dist")));
        let export = export_distributions(
            &trained.chain,
            &trained.gen,
            &view.test,
            cfg.eval.distribution_samples,
            &mut noise_rng,
        )
        .map_err(CliError::from)?;
        write_distributions(&eval_dir, &format!("split{split}"), &export)
            .map_err(CliError::from)?;
    }

    let methods = build_method_reports(&per_split).map_err(CliError::from)?;
    let windows = build_window_reports(&per_split, &cfg.eval.windows).map_err(CliError::from)?;
    let mut seeds = BTreeMap::new();
    seeds.insert("data_split".to_string(), cfg.seeds.data_split);
    seeds.insert("model_init".to_string(), cfg.seeds.model_init);
    seeds.insert("noise".to_string(), cfg.seeds.noise);
    let report = EvalReport {
        config_hash: cfg.config_hash(),
        seeds,
        m: cfg.m,
        dataset_root: cfg.dataset_root.display().to_string(),
        methods,
        windows,
        notes: vec![
            "window significance: Welch two-sided t over 3 split AUCs vs dsvdd; low power at n=3"
                .to_string(),
        ],
    };
    write_report(&eval_dir, &report).map_err(CliError::from)?;

    println!("method          mean AUC    std     per-split");
    for m in &report.methods {
        let splits: Vec<String> = m.per_split_auc.iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "{:<14}  {:.4}    {:.4}  [{}]{}",
            m.method,
            m.mean_auc,
            m.std_auc,
            splits.join(", "),
            m.detail.as_deref().map(|d| format!("  ({d})")).unwrap_or_default()
        );
    }
    println!("report: {}", eval_dir.join("report.json").display());
    Ok(())
}

/// Loads every stage bundle of a split, with dependency errors naming the
/// command that produces missing pieces.
pub fn load_split(cfg: &RunConfig, split: usize) -> Result<TrainedSplit> {
    let need = |stage: &str| -> std::path::PathBuf {
        stage_dir(&cfg.out_dir, split, stage)
    };
    let missing = |stage: &str, e: occmodels::Error| {
        CliError::Dependency(format!(
            "split {split}: {stage} artifacts unavailable ({e}); run `occflow train --stage {stage}`"
        ))
    };
    let dcae = load_dcae(&need("dcae")).map_err(|e| missing("dcae", e))?;
    let dsvdd = load_dsvdd(&need("dsvdd")).map_err(|e| missing("dsvdd", e))?;
    let iogen = load_iogen(&need("iogen")).map_err(|e| missing("iogen", e))?;
    let classifier =
        load_classifier(&need("classifier"), "classifier").map_err(|e| missing("classifier", e))?;
    let gen = load_gen(&need("gen")).map_err(|e| match e {
        CliError::Dependency(msg) => {
            CliError::Dependency(format!("{msg}; run `occflow train --stage gen`"))
        }
        other => other,
    })?;
    let (ngen, ngen_alpha) = load_ngen(&need("ngen")).map_err(|e| match e {
        CliError::Dependency(msg) => {
            CliError::Dependency(format!("{msg}; run `occflow train --stage ngen`"))
        }
        other => other,
    })?;
    let ocsvm = load_ocsvm(&need("ocsvm")).map_err(|e| match e {
        CliError::Dependency(msg) => {
            CliError::Dependency(format!("{msg}; run `occflow train --stage ocsvm`"))
        }
        other => other,
    })?;
    Ok(TrainedSplit {
        chain: IoGenChain {
            dcae,
            dsvdd,
            iogen,
            classifier,
            curves: BTreeMap::new(),
        },
        gen,
        ngen,
        ngen_alpha,
        ocsvm,
    })
}
