//! In-memory training of the full method suite for one split: the
//! DCAE -> DSVDD -> IO-GEN -> Classifier chain plus the comparison
//! baselines.

use std::collections::BTreeMap;

use baselines::{
    default_gamma, pooled_alpha, train_gen, train_ngen, train_ocsvm_grid, AlphaMode, GenBaseline,
    Kernel, OcSvmModel,
};
use ndcompute::Tensor;
use occmodels::iogen::sample_noise;
use occmodels::{
    init_center, train_dcae, train_dsvdd, train_iogen, train_label_switch_classifier,
    ClassifierConfig, ClassifierModel, DcaeConfig, DcaeModel, DsvddConfig, DsvddModel,
    IoGenConfig, IoGenModel, TrainingCurve,
};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageConfigs {
    pub dcae: DcaeConfig,
    pub dsvdd: DsvddConfig,
    pub iogen: IoGenConfig,
    pub gen: IoGenConfig,
    pub classifier: ClassifierConfig,
    pub ngen_alpha_mode: AlphaMode,
    pub ocsvm_nus: Vec<f64>,
    /// RBF kernel with gamma = 1/(dim * variance) when true, else linear.
    pub ocsvm_rbf: bool,
}

impl Default for StageConfigs {
    fn default() -> Self {
        StageConfigs {
            dcae: DcaeConfig::default(),
            dsvdd: DsvddConfig::default(),
            iogen: IoGenConfig::default(),
            gen: IoGenConfig::default(),
            classifier: ClassifierConfig::default(),
            ngen_alpha_mode: AlphaMode::default(),
            ocsvm_nus: baselines::DEFAULT_NU_GRID.to_vec(),
            ocsvm_rbf: true,
        }
    }
}

/// The primary training chain.
pub struct IoGenChain {
    pub dcae: DcaeModel,
    pub dsvdd: DsvddModel,
    pub iogen: IoGenModel,
    pub classifier: ClassifierModel,
    pub curves: BTreeMap<String, TrainingCurve>,
}

/// Everything the comparison table needs for one split.
pub struct TrainedSplit {
    pub chain: IoGenChain,
    pub gen: GenBaseline,
    pub ngen: ClassifierModel,
    pub ngen_alpha: f64,
    pub ocsvm: Vec<OcSvmModel>,
}

pub fn encode_all(encoder: &ndcompute::Network, tensors: &[&Tensor]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(tensors.len());
    for t in tensors {
        out.push(encoder.infer(t)?.into_data());
    }
    Ok(out)
}

/// Synthetic-feature source for the IO-GEN classifier: encodings of fresh
/// generator samples under the DSVDD encoder.
pub fn iogen_feature_source<'a>(
    iogen: &'a IoGenModel,
    encoder: &'a ndcompute::Network,
) -> impl FnMut(&mut ChaCha8Rng) -> occmodels::Result<Vec<f64>> + 'a {
    move |rng| {
        let z = sample_noise(iogen.sigma, rng);
        let fake = iogen.generate(&z)?;
        Ok(encoder.infer(&fake)?.into_data())
    }
}

/// Trains the primary chain. Per-stage seeds derive from `base_seed` with
/// the stage name, matching the CLI's staged commands.
pub fn train_chain(train: &[&Tensor], cfg: &StageConfigs, base_seed: u64) -> Result<IoGenChain> {
    use occmodels::config::subseed;

    let mut curves = BTreeMap::new();
    let (dcae, curve) = train_dcae(train, &cfg.dcae, subseed(base_seed, "dcae"))?;
    curves.insert("dcae".to_string(), curve);

    let center = init_center(&dcae.encoder, train)?;
    let (dsvdd, curve) =
        train_dsvdd(&dcae, center, train, &cfg.dsvdd, subseed(base_seed, "dsvdd"))?;
    curves.insert("dsvdd".to_string(), curve);

    let (iogen, curve) =
        train_iogen(&dsvdd, &dcae, train, &cfg.iogen, subseed(base_seed, "iogen"))?;
    curves.insert("iogen".to_string(), curve);

    let real_features = encode_all(&dsvdd.encoder, train)?;
    let clf_seed = subseed(base_seed, "classifier");
    let (classifier, curve) = {
        let mut source = iogen_feature_source(&iogen, &dsvdd.encoder);
        let pool = occmodels::classifier::build_feature_pool(
            cfg.classifier.synthetic_pool,
            &mut source,
            clf_seed,
        )?;
        let mut synth = occmodels::classifier::pooled_source(pool);
        train_label_switch_classifier(&real_features, &mut synth, &cfg.classifier, clf_seed)?
    };
    curves.insert("classifier".to_string(), curve);

    Ok(IoGenChain { dcae, dsvdd, iogen, classifier, curves })
}

pub fn train_split(train: &[&Tensor], cfg: &StageConfigs, base_seed: u64) -> Result<TrainedSplit> {
    use occmodels::config::subseed;

    let chain = train_chain(train, cfg, base_seed)?;

    let (gen, _, _) = train_gen(
        &chain.dcae,
        train,
        &cfg.gen,
        &cfg.classifier,
        subseed(base_seed, "gen"),
    )?;

    let dsvdd_features = encode_all(&chain.dsvdd.encoder, train)?;
    let ngen_alpha = pooled_alpha(&dsvdd_features, cfg.ngen_alpha_mode)?;
    let (ngen, _) = train_ngen(
        &dsvdd_features,
        ngen_alpha,
        &cfg.classifier,
        subseed(base_seed, "ngen"),
    )?;

    let dcae_features = encode_all(&chain.dcae.encoder, train)?;
    let kernel = if cfg.ocsvm_rbf {
        Kernel::Rbf { gamma: default_gamma(&dcae_features)? }
    } else {
        Kernel::Linear
    };
    let ocsvm = train_ocsvm_grid(&dcae_features, &cfg.ocsvm_nus, kernel)?;

    Ok(TrainedSplit { chain, gen, ngen, ngen_alpha, ocsvm })
}
