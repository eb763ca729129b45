//! The noise baseline: the label-switch classifier trained against
//! feature vectors whose elements are drawn from N(0, alpha), where alpha
//! is the pooled variation of a reference feature population. By default
//! alpha comes from the stable-train encodings, which keeps the baseline
//! independent of any trained generator; a generator-derived population
//! can be supplied instead.

use occmodels::arch::FEATURE_DIM;
use occmodels::{train_label_switch_classifier, ClassifierConfig, ClassifierModel, TrainingCurve};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether alpha is the pooled per-feature standard deviation or the
/// pooled variance ("global variation" admits either reading).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    #[default]
    Std,
    Variance,
}

/// Pooled per-feature variation of a feature population.
pub fn pooled_alpha(features: &[Vec<f64>], mode: AlphaMode) -> Result<f64> {
    if features.is_empty() {
        return Err(Error::Validation("no features for alpha estimation".into()));
    }
    let dim = features[0].len();
    let n = features.len() as f64;
    let mut pooled_var = 0.0;
    for j in 0..dim {
        let mean: f64 = features.iter().map(|f| f[j]).sum::<f64>() / n;
        let var: f64 = features.iter().map(|f| (f[j] - mean) * (f[j] - mean)).sum::<f64>() / n;
        pooled_var += var / dim as f64;
    }
    let alpha = match mode {
        AlphaMode::Std => pooled_var.sqrt(),
        AlphaMode::Variance => pooled_var,
    };
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::Validation(format!("alpha {alpha} must be positive")));
    }
    Ok(alpha)
}

/// Draws one feature vector with elements from N(0, alpha).
pub fn sample_noise_feature(alpha: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, alpha)
        .map_err(|e| Error::Validation(format!("bad alpha {alpha}: {e}")))?;
    Ok((0..FEATURE_DIM).map(|_| normal.sample(rng)).collect())
}

pub fn train_ngen(
    real_features: &[Vec<f64>],
    alpha: f64,
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<(ClassifierModel, TrainingCurve)> {
    if alpha <= 0.0 {
        return Err(Error::Validation(format!("alpha {alpha} must be positive")));
    }
    let mut synth =
        |rng: &mut ChaCha8Rng| -> occmodels::Result<Vec<f64>> {
            sample_noise_feature(alpha, rng)
                .map_err(|e| occmodels::Error::Validation(e.to_string()))
        };
    Ok(train_label_switch_classifier(real_features, &mut synth, cfg, seed)?)
}
