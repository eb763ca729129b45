//! Stage bookkeeping: artifact directories, dependency checks against the
//! pipeline state file, and bundle save/load for every trainable stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use baselines::{GenBaseline, Kernel, OcSvmModel};
use occmodels::arch::{input_shape, BOTTLENECK_SHAPE, FEATURE_DIM, NOISE_DIM};
use occmodels::bundle::{
    self, bundle_digest, load_network, save_bundle, BundleMeta,
};
use occmodels::{ClassifierModel, IoGenModel, PipelineState, StageRecord};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const STAGE_ORDER: [&str; 7] = ["dcae", "dsvdd", "iogen", "classifier", "gen", "ngen", "ocsvm"];

pub fn stage_dependencies(stage: &str) -> &'static [&'static str] {
    match stage {
        "dcae" => &[],
        "dsvdd" => &["dcae"],
        "iogen" => &["dcae", "dsvdd"],
        "classifier" => &["dsvdd", "iogen"],
        "gen" => &["dcae"],
        "ngen" => &["dsvdd"],
        "ocsvm" => &["dcae"],
        _ => &[],
    }
}

pub fn is_stage(stage: &str) -> bool {
    STAGE_ORDER.contains(&stage)
}

pub fn stage_dir(out: &Path, split: usize, stage: &str) -> PathBuf {
    out.join(format!("split{split}")).join(stage)
}

pub fn stage_key(split: usize, stage: &str) -> String {
    format!("split{split}/{stage}")
}

/// Hash of exactly the settings this stage's training depends on, so
/// changing one stage's hyperparameters does not invalidate the others.
pub fn stage_config_hash(cfg: &RunConfig, stage: &str) -> String {
    let relevant = match stage {
        "dcae" => serde_json::json!({ "stage": &cfg.stages.dcae }),
        "dsvdd" => serde_json::json!({ "stage": &cfg.stages.dsvdd }),
        "iogen" => serde_json::json!({ "stage": &cfg.stages.iogen }),
        "classifier" => serde_json::json!({ "stage": &cfg.stages.classifier }),
        "gen" => serde_json::json!({
            "stage": &cfg.stages.gen,
            "classifier": &cfg.stages.classifier,
        }),
        "ngen" => serde_json::json!({
            "classifier": &cfg.stages.classifier,
            "alpha_mode": &cfg.stages.ngen_alpha_mode,
        }),
        "ocsvm" => serde_json::json!({
            "nus": &cfg.stages.ocsvm_nus,
            "rbf": cfg.stages.ocsvm_rbf,
        }),
        other => serde_json::json!({ "stage": other }),
    };
    let envelope = serde_json::json!({
        "m": cfg.m,
        "model_init": cfg.seeds.model_init,
        "settings": relevant,
    });
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(&envelope).expect("stage config serializes"));
    bundle::hex_string(&hasher.finalize())
}

/// Content hash of the dataset manifest, the upstream of every stage.
pub fn dataset_digest(root: &Path) -> Result<String> {
    let bytes = std::fs::read(root.join("manifest.json")).map_err(|e| {
        CliError::Dependency(format!(
            "dataset manifest {} missing ({e}); run `occflow simulate` or point dataset_root \
             at an ingested dataset",
            root.join("manifest.json").display()
        ))
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(bundle::hex_string(&hasher.finalize()))
}

/// Checks that every upstream stage is recorded, still matches its digest
/// on disk and was built under the current config hash. Returns the
/// upstream digest map for the new record.
pub fn check_upstream(
    cfg: &RunConfig,
    state: &PipelineState,
    split: usize,
    stage: &str,
) -> Result<BTreeMap<String, String>> {
    let mut upstream = BTreeMap::new();
    upstream.insert("dataset".to_string(), dataset_digest(&cfg.dataset_root)?);
    for dep in stage_dependencies(stage) {
        let key = stage_key(split, dep);
        let record = state.get(&key).ok_or_else(|| {
            CliError::Dependency(format!(
                "stage {stage} needs {dep} for split {split}; run `occflow train --stage {dep}` first"
            ))
        })?;
        let dir = stage_dir(&cfg.out_dir, split, dep);
        let digest = bundle_digest(&dir).map_err(|e| {
            CliError::Dependency(format!(
                "artifacts for {key} are missing or unreadable ({e}); run `occflow train --stage {dep}`"
            ))
        })?;
        if digest != record.artifact_digest {
            return Err(CliError::Dependency(format!(
                "artifacts for {key} changed since they were recorded; run `occflow train --stage {dep}`"
            )));
        }
        if record.config_hash != stage_config_hash(cfg, dep) {
            return Err(CliError::Dependency(format!(
                "{key} was trained under different settings; run `occflow train --stage {dep}`"
            )));
        }
        upstream.insert(dep.to_string(), digest);
    }
    Ok(upstream)
}

/// A stage is up to date when its record matches the current config, its
/// artifact digest still matches the directory, and its recorded upstream
/// digests equal the current ones.
pub fn stage_up_to_date(
    cfg: &RunConfig,
    state: &PipelineState,
    split: usize,
    stage: &str,
    upstream: &BTreeMap<String, String>,
) -> bool {
    let key = stage_key(split, stage);
    let Some(record) = state.get(&key) else {
        return false;
    };
    if record.config_hash != cfg.config_hash() || &record.upstream != upstream {
        return false;
    }
    let dir = stage_dir(&cfg.out_dir, split, stage);
    matches!(bundle_digest(&dir), Ok(d) if d == record.artifact_digest)
}

pub fn record_stage(
    cfg: &RunConfig,
    state: &mut PipelineState,
    split: usize,
    stage: &str,
    upstream: BTreeMap<String, String>,
) -> Result<()> {
    let dir = stage_dir(&cfg.out_dir, split, stage);
    let digest = bundle_digest(&dir).map_err(|e| CliError::Config(e.to_string()))?;
    state.record(
        &stage_key(split, stage),
        StageRecord {
            config_hash: cfg.config_hash(),
            artifact_digest: digest,
            upstream,
        },
    );
    state.save(&cfg.out_dir).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(())
}

// ---- gen / ngen / ocsvm bundle glue ----

pub fn save_gen(dir: &Path, model: &GenBaseline, m: usize) -> Result<()> {
    let meta = BundleMeta {
        kind: "gen".into(),
        m,
        networks: BTreeMap::from([
            ("generator_head".to_string(), vec![NOISE_DIM]),
            ("generator_decoder".to_string(), BOTTLENECK_SHAPE.to_vec()),
            ("discriminator_body".to_string(), input_shape(m).to_vec()),
            ("discriminator_head".to_string(), vec![FEATURE_DIM]),
            ("classifier".to_string(), vec![FEATURE_DIM, 1]),
        ]),
        scalars: BTreeMap::from([
            ("sigma".to_string(), model.gan.sigma),
            ("lambda_feat".to_string(), model.gan.lambda_feat),
        ]),
        vectors: BTreeMap::new(),
    };
    save_bundle(
        dir,
        &meta,
        &[
            ("generator_head", &model.gan.generator_head),
            ("generator_decoder", &model.gan.generator_decoder),
            ("discriminator_body", &model.gan.discriminator_body),
            ("discriminator_head", &model.gan.discriminator_head),
            ("classifier", &model.classifier.net),
        ],
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_gen(dir: &Path) -> Result<GenBaseline> {
    let meta = bundle::load_meta(dir).map_err(CliError::from_bundle)?;
    if meta.kind != "gen" {
        return Err(CliError::Dependency(format!(
            "{} holds kind {}, expected gen",
            dir.display(),
            meta.kind
        )));
    }
    let load = |name: &str| load_network(dir, &meta, name).map_err(CliError::from_bundle);
    Ok(GenBaseline {
        gan: IoGenModel {
            generator_head: load("generator_head")?,
            generator_decoder: load("generator_decoder")?,
            discriminator_body: load("discriminator_body")?,
            discriminator_head: load("discriminator_head")?,
            sigma: meta.scalars.get("sigma").copied().unwrap_or(1.0),
            lambda_feat: meta.scalars.get("lambda_feat").copied().unwrap_or(10.0),
            m: meta.m,
        },
        classifier: ClassifierModel { net: load("classifier")? },
    })
}

pub fn save_ngen(dir: &Path, model: &ClassifierModel, alpha: f64, m: usize) -> Result<()> {
    let meta = BundleMeta {
        kind: "ngen".into(),
        m,
        networks: BTreeMap::from([("classifier".to_string(), vec![FEATURE_DIM, 1])]),
        scalars: BTreeMap::from([("alpha".to_string(), alpha)]),
        vectors: BTreeMap::new(),
    };
    save_bundle(dir, &meta, &[("classifier", &model.net)])
        .map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_ngen(dir: &Path) -> Result<(ClassifierModel, f64)> {
    let meta = bundle::load_meta(dir).map_err(CliError::from_bundle)?;
    if meta.kind != "ngen" {
        return Err(CliError::Dependency(format!(
            "{} holds kind {}, expected ngen",
            dir.display(),
            meta.kind
        )));
    }
    let net = load_network(dir, &meta, "classifier").map_err(CliError::from_bundle)?;
    let alpha = meta.scalars.get("alpha").copied().unwrap_or(0.0);
    Ok((ClassifierModel { net }, alpha))
}

pub fn save_ocsvm(dir: &Path, models: &[OcSvmModel]) -> Result<()> {
    let mut networks = BTreeMap::new();
    let mut scalars = BTreeMap::new();
    let mut vectors = BTreeMap::new();
    let mut nets: Vec<(String, ndcompute::Network)> = Vec::new();
    for (i, model) in models.iter().enumerate() {
        let n_sv = model.support_vectors.len();
        let mut weights = vec![0.0; FEATURE_DIM * n_sv];
        for (j, sv) in model.support_vectors.iter().enumerate() {
            for (k, &v) in sv.iter().enumerate() {
                weights[k * n_sv + j] = v;
            }
        }
        let spec = ndcompute::LayerSpec::Dense {
            in_dim: FEATURE_DIM,
            out_dim: n_sv,
            bias: false,
        };
        let net = ndcompute::Network::from_params(
            &[FEATURE_DIM],
            vec![(spec, Some(weights), None)],
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let name = format!("sv_{i}");
        networks.insert(name.clone(), vec![FEATURE_DIM]);
        nets.push((name, net));
        vectors.insert(format!("alphas_{i}"), model.alphas.clone());
        scalars.insert(format!("nu_{i}"), model.nu);
        scalars.insert(format!("rho_{i}"), model.rho);
        if let Kernel::Rbf { gamma } = model.kernel {
            scalars.insert(format!("gamma_{i}"), gamma);
        }
    }
    scalars.insert("count".to_string(), models.len() as f64);
    let meta = BundleMeta {
        kind: "ocsvm".into(),
        m: 0,
        networks,
        scalars,
        vectors,
    };
    let refs: Vec<(&str, &ndcompute::Network)> =
        nets.iter().map(|(n, net)| (n.as_str(), net)).collect();
    save_bundle(dir, &meta, &refs).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_ocsvm(dir: &Path) -> Result<Vec<OcSvmModel>> {
    let meta = bundle::load_meta(dir).map_err(CliError::from_bundle)?;
    if meta.kind != "ocsvm" {
        return Err(CliError::Dependency(format!(
            "{} holds kind {}, expected ocsvm",
            dir.display(),
            meta.kind
        )));
    }
    let count = meta.scalars.get("count").copied().unwrap_or(0.0) as usize;
    let mut models = Vec::with_capacity(count);
    for i in 0..count {
        let net = load_network(dir, &meta, &format!("sv_{i}")).map_err(CliError::from_bundle)?;
        let weights = net.layers()[0]
            .weights()
            .expect("support-vector layer has weights")
            .data()
            .to_vec();
        let alphas = meta
            .vectors
            .get(&format!("alphas_{i}"))
            .cloned()
            .unwrap_or_default();
        let n_sv = alphas.len();
        let mut support_vectors = vec![vec![0.0; FEATURE_DIM]; n_sv];
        for (j, sv) in support_vectors.iter_mut().enumerate() {
            for (k, slot) in sv.iter_mut().enumerate() {
                *slot = weights[k * n_sv + j];
            }
        }
        let kernel = match meta.scalars.get(&format!("gamma_{i}")) {
            Some(&gamma) => Kernel::Rbf { gamma },
            None => Kernel::Linear,
        };
        models.push(OcSvmModel {
            nu: meta.scalars.get(&format!("nu_{i}")).copied().unwrap_or(0.1),
            kernel,
            support_vectors,
            alphas,
            rho: meta.scalars.get(&format!("rho_{i}")).copied().unwrap_or(0.0),
        });
    }
    Ok(models)
}

impl CliError {
    pub fn from_bundle(e: occmodels::Error) -> CliError {
        CliError::Dependency(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ocsvm_bundle_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let model = OcSvmModel {
            nu: 0.1,
            kernel: Kernel::Rbf { gamma: 0.25 },
            support_vectors: vec![vec![0.5; FEATURE_DIM], vec![-0.25; FEATURE_DIM]],
            alphas: vec![0.6, 0.4],
            rho: 0.123,
        };
        save_ocsvm(dir.path(), &[model.clone()]).unwrap();
        let back = load_ocsvm(dir.path()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].nu, model.nu);
        assert_eq!(back[0].rho, model.rho);
        assert_eq!(back[0].alphas, model.alphas);
        assert_eq!(back[0].support_vectors, model.support_vectors);
        let x = vec![0.1; FEATURE_DIM];
        assert!((back[0].decision(&x) - model.decision(&x)).abs() < 1e-15);
    }
}
