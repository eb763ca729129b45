//! Stage-by-stage training with persisted bundles, training curves and
//! pipeline-state bookkeeping.

use std::path::Path;

use baselines::{default_gamma, pooled_alpha, train_gen, train_ngen, train_ocsvm_grid, Kernel};
use flowdata::Dataset;
use ndcompute::Tensor;
use occmodels::bundle::{load_dcae, load_dsvdd, load_iogen, save_classifier, save_dcae, save_dsvdd, save_iogen};
use occmodels::config::subseed;
use occmodels::iogen::sample_noise;
use occmodels::{
    init_center, train_dcae, train_dsvdd, train_iogen, train_label_switch_classifier,
    PipelineState, TrainingCurve,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::stages::{
    check_upstream, is_stage, record_stage, save_gen, save_ngen, save_ocsvm, stage_dir,
    stage_up_to_date, STAGE_ORDER,
};

pub fn cmd_train(cfg: &RunConfig, stage: &str, dry_run: bool) -> Result<()> {
    let stages: Vec<&str> = if stage == "all" {
        STAGE_ORDER.to_vec()
    } else if is_stage(stage) {
        vec![stage]
    } else {
        return Err(CliError::Config(format!(
            "unknown stage {stage}; expected one of {} or all",
            STAGE_ORDER.join("|")
        )));
    };

    if dry_run {
        println!("resolved config:\n{}", cfg.to_pretty_json());
        println!("config hash: {}", cfg.config_hash());
        println!("plan:");
        for split in 0..flowdata::SPLIT_COUNT {
            for s in &stages {
                let deps = crate::stages::stage_dependencies(s).join(", ");
                println!(
                    "  split{split}/{s} <- [{}] -> {}",
                    if deps.is_empty() { "dataset".to_string() } else { format!("dataset, {deps}") },
                    stage_dir(&cfg.out_dir, split, s).display()
                );
            }
        }
        return Ok(());
    }

    let dataset = Dataset::ingest(&cfg.dataset_root, cfg.m)?;
    let mut state = PipelineState::load(&cfg.out_dir).map_err(|e| CliError::Config(e.to_string()))?;

    for split in 0..dataset.manifest.splits.len() {
        let view = dataset.split_view(split)?;
        let train: Vec<&Tensor> = view.train.iter().map(|s| &s.tensor).collect();
        for s in &stages {
            train_one_stage(cfg, &mut state, split, s, &train)?;
        }
    }
    Ok(())
}

fn save_curve(dir: &Path, curve: &TrainingCurve) -> Result<()> {
    curve
        .save(&dir.join("curves.csv"))
        .map_err(|e| CliError::Config(e.to_string()))
}

fn train_one_stage(
    cfg: &RunConfig,
    state: &mut PipelineState,
    split: usize,
    stage: &str,
    train: &[&Tensor],
) -> Result<()> {
    let upstream = check_upstream(cfg, state, split, stage)?;
    if stage_up_to_date(cfg, state, split, stage, &upstream) {
        println!("split{split}/{stage}: up to date");
        return Ok(());
    }
    let dir = stage_dir(&cfg.out_dir, split, stage);
    std::fs::create_dir_all(&dir)?;
    let seed = subseed(cfg.split_seed_base(split), stage);
    let started = std::time::Instant::now();

    match stage {
        "dcae" => {
            let (model, curve) = train_dcae(train, &cfg.stages.dcae, seed)?;
            save_dcae(&dir, &model)?;
            save_curve(&dir, &curve)?;
        }
        "dsvdd" => {
            let dcae = load_dcae(&stage_dir(&cfg.out_dir, split, "dcae")).map_err(CliError::from_bundle)?;
            let center = init_center(&dcae.encoder, train)?;
            let (model, curve) = train_dsvdd(&dcae, center, train, &cfg.stages.dsvdd, seed)?;
            save_dsvdd(&dir, &model)?;
            save_curve(&dir, &curve)?;
        }
        "iogen" => {
            let dcae = load_dcae(&stage_dir(&cfg.out_dir, split, "dcae")).map_err(CliError::from_bundle)?;
            let dsvdd = load_dsvdd(&stage_dir(&cfg.out_dir, split, "dsvdd")).map_err(CliError::from_bundle)?;
            let (model, curve) = train_iogen(&dsvdd, &dcae, train, &cfg.stages.iogen, seed)?;
            save_iogen(&dir, &model)?;
            save_curve(&dir, &curve)?;
        }
        "classifier" => {
            let dsvdd = load_dsvdd(&stage_dir(&cfg.out_dir, split, "dsvdd")).map_err(CliError::from_bundle)?;
            let iogen = load_iogen(&stage_dir(&cfg.out_dir, split, "iogen")).map_err(CliError::from_bundle)?;
            let real_features = encode_all(&dsvdd.encoder, train)?;
            let mut source = |rng: &mut rand_chacha::ChaCha8Rng| -> occmodels::Result<Vec<f64>> {
                let z = sample_noise(iogen.sigma, rng);
                let fake = iogen.generate(&z)?;
                Ok(dsvdd.encoder.infer(&fake)?.into_data())
            };
            let pool = occmodels::classifier::build_feature_pool(
                cfg.stages.classifier.synthetic_pool,
                &mut source,
                seed,
            )?;
            let mut synth = occmodels::classifier::pooled_source(pool);
            let (model, curve) =
                train_label_switch_classifier(&real_features, &mut synth, &cfg.stages.classifier, seed)?;
            save_classifier(&dir, &model, "classifier", cfg.m).map_err(CliError::from_bundle)?;
            save_curve(&dir, &curve)?;
        }
        "gen" => {
            let dcae = load_dcae(&stage_dir(&cfg.out_dir, split, "dcae")).map_err(CliError::from_bundle)?;
            let (model, gan_curve, _clf_curve) =
                train_gen(&dcae, train, &cfg.stages.gen, &cfg.stages.classifier, seed)
                    .map_err(CliError::from)?;
            save_gen(&dir, &model, cfg.m)?;
            save_curve(&dir, &gan_curve)?;
        }
        "ngen" => {
            let dsvdd = load_dsvdd(&stage_dir(&cfg.out_dir, split, "dsvdd")).map_err(CliError::from_bundle)?;
            let features = encode_all(&dsvdd.encoder, train)?;
            let alpha = pooled_alpha(&features, cfg.stages.ngen_alpha_mode).map_err(CliError::from)?;
            let (model, curve) =
                train_ngen(&features, alpha, &cfg.stages.classifier, seed).map_err(CliError::from)?;
            save_ngen(&dir, &model, alpha, cfg.m)?;
            save_curve(&dir, &curve)?;
        }
        "ocsvm" => {
            let dcae = load_dcae(&stage_dir(&cfg.out_dir, split, "dcae")).map_err(CliError::from_bundle)?;
            let features = encode_all(&dcae.encoder, train)?;
            let kernel = if cfg.stages.ocsvm_rbf {
                Kernel::Rbf { gamma: default_gamma(&features).map_err(CliError::from)? }
            } else {
                Kernel::Linear
            };
            let models =
                train_ocsvm_grid(&features, &cfg.stages.ocsvm_nus, kernel).map_err(CliError::from)?;
            save_ocsvm(&dir, &models)?;
        }
        _ => unreachable!("validated above"),
    }

    record_stage(cfg, state, split, stage, upstream)?;
    println!(
        "split{split}/{stage}: trained in {:.1}s -> {}",
        started.elapsed().as_secs_f64(),
        dir.display()
    );
    Ok(())
}

fn encode_all(encoder: &ndcompute::Network, tensors: &[&Tensor]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(tensors.len());
    for t in tensors {
        out.push(encoder.infer(t).map_err(CliError::from)?.into_data());
    }
    Ok(out)
}
