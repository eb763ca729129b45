//! Per-stage training hyperparameters. Adam runs with GAN-friendly
//! defaults everywhere (lr 1e-4, beta1 0.5, beta2 0.999) since the paper
//! never names an optimizer.

use serde::{Deserialize, Serialize};

pub const DEFAULT_LR: f64 = 1e-4;
pub const DEFAULT_BETA1: f64 = 0.5;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: DEFAULT_LR,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdamConfig { learning_rate, ..AdamConfig::default() }
    }

    pub fn build(&self) -> ndcompute::Adam {
        ndcompute::Adam::new(self.learning_rate, self.beta1, self.beta2, self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DcaeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    /// Fraction of the stable-train set held out to track validation MSE.
    pub val_fraction: f64,
}

impl Default for DcaeConfig {
    fn default() -> Self {
        DcaeConfig {
            epochs: 12,
            batch_size: 64,
            optimizer: AdamConfig::with_lr(1e-3),
            val_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DsvddConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    /// lambda of the Frobenius weight-decay regularizer.
    pub weight_decay: f64,
}

impl Default for DsvddConfig {
    fn default() -> Self {
        DsvddConfig {
            epochs: 10,
            batch_size: 64,
            optimizer: AdamConfig::default(),
            weight_decay: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IoGenConfig {
    /// Alternating D/G iterations (one of each per iteration).
    pub iterations: usize,
    pub batch_size: usize,
    pub generator: AdamConfig,
    pub discriminator: AdamConfig,
    /// Noise prior std for z.
    pub sigma: f64,
    /// Weight of the feature-matching term in the composite loss.
    pub lambda_feat: f64,
    pub d_steps_per_g: usize,
    /// Generated-batch variance is checked every this many iterations.
    pub collapse_check_interval: usize,
}

impl Default for IoGenConfig {
    fn default() -> Self {
        IoGenConfig {
            iterations: 120,
            batch_size: 64,
            generator: AdamConfig::with_lr(1e-3),
            discriminator: AdamConfig::default(),
            sigma: 1.0,
            lambda_feat: 10.0,
            d_steps_per_g: 1,
            collapse_check_interval: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    /// Synthetic features are drawn from a pool of this many fresh
    /// generator samples, so classifier epochs do not pay a full
    /// generate-and-encode pass per real sample.
    pub synthetic_pool: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            epochs: 30,
            batch_size: 64,
            optimizer: AdamConfig::with_lr(1e-3),
            synthetic_pool: 512,
        }
    }
}

/// Stable seed derivation for the independent random streams each stage
/// needs (model init, shuffling, noise).
pub fn subseed(base: u64, tag: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in tag.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ base
}
