//! Deterministic weight initialization.
//!
//! Layers feeding a ReLU-family activation get He-style uniform limits,
//! tanh/sigmoid heads get Xavier-style limits. Biases start at zero.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::activation::ActivationName;
use crate::layer::LayerSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    He,
    Xavier,
    Zeros,
}

impl Init {
    pub fn sample(self, fan_in: usize, fan_out: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let limit = match self {
            Init::He => (6.0 / fan_in as f64).sqrt(),
            Init::Xavier => (6.0 / (fan_in + fan_out) as f64).sqrt(),
            Init::Zeros => return vec![0.0; n],
        };
        (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
    }
}

/// Picks the initializer for the parametric layer at `index` by looking at
/// the next activation layer that follows it (before any other parametric
/// layer). No activation means a linear head, which gets Xavier.
pub fn infer_init(specs: &[LayerSpec], index: usize) -> Init {
    for spec in &specs[index + 1..] {
        match spec {
            LayerSpec::Activation { name, .. } => {
                return match name {
                    ActivationName::Relu | ActivationName::LeakyRelu => Init::He,
                    ActivationName::Tanh | ActivationName::Sigmoid => Init::Xavier,
                }
            }
            LayerSpec::Conv2d { .. } | LayerSpec::Conv1d { .. } | LayerSpec::Dense { .. } => break,
            _ => continue,
        }
    }
    Init::Xavier
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn seeded_sampling_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let wa = Init::He.sample(16, 32, 64, &mut a);
        let wb = Init::He.sample(16, 32, 64, &mut b);
        assert_eq!(wa, wb);
    }

    #[test]
    fn init_follows_next_activation() {
        let specs = vec![
            LayerSpec::Dense { in_dim: 4, out_dim: 4, bias: true },
            LayerSpec::Activation { name: ActivationName::Relu, alpha: None },
            LayerSpec::Dense { in_dim: 4, out_dim: 1, bias: true },
            LayerSpec::Activation { name: ActivationName::Sigmoid, alpha: None },
        ];
        assert_eq!(infer_init(&specs, 0), Init::He);
        assert_eq!(infer_init(&specs, 2), Init::Xavier);
    }

    #[test]
    fn pooling_does_not_hide_the_activation() {
        let specs = vec![
            LayerSpec::Conv2d { in_channels: 1, kernels: 2, kernel_size: 3, stride: 1, bias: false },
            LayerSpec::MaxPool2d { window: 2, stride: 2 },
            LayerSpec::Activation { name: ActivationName::Relu, alpha: None },
        ];
        assert_eq!(infer_init(&specs, 0), Init::He);
    }
}
