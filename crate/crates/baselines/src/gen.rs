//! The plain generative baseline: the same alternating GAN loop, but
//! feature matching anchors generated samples to the discriminator's own
//! hidden features of real data instead of the hypersphere center. Its
//! label-switch classifier runs on pretrained (not DSVDD-tuned) encoder
//! features.

use ndcompute::Tensor;
use occmodels::iogen::{sample_noise, train_gan, FeatureObjective};
use occmodels::{
    train_label_switch_classifier, ClassifierConfig, ClassifierModel, DcaeModel, IoGenConfig,
    IoGenModel, TrainingCurve,
};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

pub struct GenBaseline {
    pub gan: IoGenModel,
    pub classifier: ClassifierModel,
}

pub fn train_gen(
    dcae: &DcaeModel,
    train: &[&Tensor],
    gan_cfg: &IoGenConfig,
    clf_cfg: &ClassifierConfig,
    seed: u64,
) -> Result<(GenBaseline, TrainingCurve, TrainingCurve)> {
    let (gan, gan_curve) = train_gan(
        dcae,
        train,
        gan_cfg,
        seed,
        FeatureObjective::DiscriminatorRealMean,
    )?;

    let mut real_features = Vec::with_capacity(train.len());
    for x in train {
        real_features.push(dcae.encoder.infer(x)?.into_data());
    }
    let sigma = gan.sigma;
    let encoder = dcae.encoder.clone();
    let gan_ref = &gan;
    let mut source = move |rng: &mut ChaCha8Rng| -> occmodels::Result<Vec<f64>> {
        let z = sample_noise(sigma, rng);
        let fake = gan_ref.generate(&z)?;
        Ok(encoder.infer(&fake)?.into_data())
    };
    let pool =
        occmodels::classifier::build_feature_pool(clf_cfg.synthetic_pool, &mut source, seed)?;
    let mut synth = occmodels::classifier::pooled_source(pool);
    let (classifier, clf_curve) =
        train_label_switch_classifier(&real_features, &mut synth, clf_cfg, seed)?;
    Ok((GenBaseline { gan, classifier }, gan_curve, clf_curve))
}
