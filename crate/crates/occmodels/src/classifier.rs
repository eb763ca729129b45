//! Label-switch classifier on DSVDD features.
//!
//! Real stable samples are labeled "unstable" (1.0) and synthetic inner
//! outliers are labeled "stable" (0.0), so the predicted likelihood of
//! instability grows with distance from the center. Batches are balanced:
//! equal real and synthetic counts.

use log::info;
use ndcompute::{bce, Network, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arch::{build_classifier, FEATURE_DIM};
use crate::config::{subseed, ClassifierConfig};
use crate::curve::TrainingCurve;
use crate::dcae::shuffled_batches;
use crate::error::{Error, Result};

pub const LABEL_UNSTABLE: f64 = 1.0;
pub const LABEL_STABLE: f64 = 0.0;

#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pub net: Network,
}

impl ClassifierModel {
    pub fn fresh(seed: u64) -> Result<ClassifierModel> {
        Ok(ClassifierModel { net: build_classifier(seed)? })
    }

    /// Likelihood of the unstable state for a 2048-dim feature vector.
    pub fn predict_feature(&self, feature: &[f64]) -> Result<f64> {
        if feature.len() != FEATURE_DIM {
            return Err(Error::Validation(format!(
                "feature must be {FEATURE_DIM}-dim, got {}",
                feature.len()
            )));
        }
        let x = Tensor::from_vec(&[FEATURE_DIM, 1], feature.to_vec())?;
        Ok(self.net.infer(&x)?.data()[0])
    }
}

/// Trains the classifier with the label switch. `synth` supplies one
/// synthetic feature vector per call (fresh z each time for generators;
/// fresh noise for the N-GEN variant).
pub fn train_label_switch_classifier(
    real_features: &[Vec<f64>],
    synth: &mut dyn FnMut(&mut ChaCha8Rng) -> Result<Vec<f64>>,
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<(ClassifierModel, TrainingCurve)> {
    if real_features.is_empty() {
        return Err(Error::Validation("no real features to train on".into()));
    }
    let mut model = ClassifierModel::fresh(subseed(seed, "classifier.init"))?;
    let mut opt = cfg.optimizer.build();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(subseed(seed, "classifier.shuffle"));
    let mut synth_rng = ChaCha8Rng::seed_from_u64(subseed(seed, "classifier.synth"));

    let half = (cfg.batch_size / 2).max(1);
    let mut curve = TrainingCurve::new(&["epoch", "bce"]);
    for epoch in 1..=cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for batch in shuffled_batches(real_features.len(), half, &mut shuffle_rng) {
            model.net.zero_grads();
            let total = (batch.len() * 2) as f64;
            let step = |model: &mut ClassifierModel, feat: &[f64], label: f64| -> Result<f64> {
                let x = Tensor::from_vec(&[FEATURE_DIM, 1], feat.to_vec())?;
                let p = model.net.forward(&x)?.data()[0];
                let (loss, dp) = bce(p, label);
                let grad = Tensor::from_vec(&[1], vec![dp / total])?;
                model.net.backward(&grad)?;
                Ok(loss)
            };
            for &i in &batch {
                epoch_loss += step(&mut model, &real_features[i], LABEL_UNSTABLE)?;
                let synthetic = synth(&mut synth_rng)?;
                epoch_loss += step(&mut model, &synthetic, LABEL_STABLE)?;
                seen += 2;
            }
            opt.step(&mut model.net)?;
        }
        let mean = epoch_loss / seen.max(1) as f64;
        if !mean.is_finite() {
            return Err(Error::Diverged(format!("classifier loss at epoch {epoch}")));
        }
        curve.push(vec![epoch as f64, mean])?;
        info!("classifier epoch {epoch}: bce {mean:.5}");
    }
    model.net.clear_caches();
    Ok((model, curve))
}

/// Draws `n` features from a source into a pool.
pub fn build_feature_pool(
    n: usize,
    source: &mut dyn FnMut(&mut ChaCha8Rng) -> Result<Vec<f64>>,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, "classifier.pool"));
    (0..n.max(1)).map(|_| source(&mut rng)).collect()
}

/// Synthetic-feature source sampling a pregenerated pool with
/// replacement.
pub fn pooled_source(pool: Vec<Vec<f64>>) -> impl FnMut(&mut ChaCha8Rng) -> Result<Vec<f64>> {
    use rand::Rng;
    move |rng| {
        let i = rng.gen_range(0..pool.len());
        Ok(pool[i].clone())
    }
}

/// Deterministic composition classifier(phi(stack)) with input validation:
/// the stack tensor must be a normalized [-1, 1] volume of the expected
/// shape.
pub fn predict(encoder: &Network, classifier: &ClassifierModel, stack: &Tensor) -> Result<f64> {
    if stack.shape() != encoder.input_shape() {
        return Err(Error::Validation(format!(
            "stack shape {:?} does not match encoder input {:?}",
            stack.shape(),
            encoder.input_shape()
        )));
    }
    let bound = stack.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if bound > 1.0 + 1e-9 {
        return Err(Error::Validation(format!(
            "stack is not normalized: |value| up to {bound:.3} exceeds 1"
        )));
    }
    let feature = encoder.infer(stack)?;
    classifier.predict_feature(feature.data())
}
