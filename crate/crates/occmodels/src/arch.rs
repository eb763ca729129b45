//! Model architectures.
//!
//! The encoder runs three 3x3 convolution blocks of 32, 64 and 128
//! kernels, each followed by ReLU and 2x2 maxpooling, then a 32-kernel
//! bottleneck convolution; flattened it yields the 2048-dim feature
//! vector. The decoder mirrors it with nearest-neighbor upsampling and a
//! tanh output layer of 2m kernels. Encoder convolutions carry no biases
//! (hypersphere-collapse prevention); decoder convolutions do.

use ndcompute::{ActivationName, LayerSpec, Network, Result};

pub const FEATURE_DIM: usize = 2048;
pub const NOISE_DIM: usize = 100;
pub const BOTTLENECK_SHAPE: [usize; 3] = [8, 8, 32];
pub const CLASSIFIER_LEAKY_ALPHA: f64 = 0.3;

pub fn input_shape(m: usize) -> [usize; 3] {
    [64, 64, 2 * m]
}

fn conv2d(in_channels: usize, kernels: usize, bias: bool) -> LayerSpec {
    LayerSpec::Conv2d { in_channels, kernels, kernel_size: 3, stride: 1, bias }
}

fn conv1d(in_channels: usize, kernels: usize) -> LayerSpec {
    LayerSpec::Conv1d { in_channels, kernels, kernel_size: 3, stride: 1, bias: true }
}

fn act(name: ActivationName) -> LayerSpec {
    LayerSpec::Activation { name, alpha: None }
}

fn leaky() -> LayerSpec {
    LayerSpec::Activation {
        name: ActivationName::LeakyRelu,
        alpha: Some(CLASSIFIER_LEAKY_ALPHA),
    }
}

pub fn encoder_specs(m: usize) -> Vec<LayerSpec> {
    vec![
        conv2d(2 * m, 32, false),
        act(ActivationName::Relu),
        LayerSpec::MaxPool2d { window: 2, stride: 2 },
        conv2d(32, 64, false),
        act(ActivationName::Relu),
        LayerSpec::MaxPool2d { window: 2, stride: 2 },
        conv2d(64, 128, false),
        act(ActivationName::Relu),
        LayerSpec::MaxPool2d { window: 2, stride: 2 },
        // Linear bottleneck: the feature layer has no activation.
        conv2d(128, 32, false),
        LayerSpec::Flatten,
    ]
}

pub fn decoder_specs(m: usize) -> Vec<LayerSpec> {
    vec![
        conv2d(32, 128, true),
        act(ActivationName::Relu),
        LayerSpec::Upsample2d { factor: 2 },
        conv2d(128, 64, true),
        act(ActivationName::Relu),
        LayerSpec::Upsample2d { factor: 2 },
        conv2d(64, 32, true),
        act(ActivationName::Relu),
        LayerSpec::Upsample2d { factor: 2 },
        conv2d(32, 2 * m, true),
        act(ActivationName::Tanh),
    ]
}

/// Dense + ReLU head mapping the noise vector into the bottleneck volume.
pub fn generator_head_specs() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Dense { in_dim: NOISE_DIM, out_dim: FEATURE_DIM, bias: true },
        act(ActivationName::Relu),
    ]
}

/// Dense + sigmoid head on top of the (reinitialized) encoder body.
pub fn discriminator_head_specs() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Dense { in_dim: FEATURE_DIM, out_dim: 1, bias: true },
        act(ActivationName::Sigmoid),
    ]
}

/// Five 1D conv layers of 8, 16, 24, 48 and 48 kernels over the feature
/// vector viewed as a length-2048 single-channel sequence. LeakyReLU
/// (alpha 0.3) and window-2 average pooling follow each, then a dense
/// sigmoid head.
pub fn classifier_specs() -> Vec<LayerSpec> {
    let mut specs = Vec::new();
    let widths = [8usize, 16, 24, 48, 48];
    let mut in_c = 1;
    for w in widths {
        specs.push(conv1d(in_c, w));
        specs.push(leaky());
        specs.push(LayerSpec::AvgPool1d { window: 2, stride: 2 });
        in_c = w;
    }
    specs.push(LayerSpec::Flatten);
    // 2048 pooled five times is 64 positions of 48 channels.
    specs.push(LayerSpec::Dense { in_dim: 64 * 48, out_dim: 1, bias: true });
    specs.push(act(ActivationName::Sigmoid));
    specs
}

pub fn build_encoder(m: usize, seed: u64) -> Result<Network> {
    Network::new(&input_shape(m), encoder_specs(m), seed)
}

pub fn build_decoder(m: usize, seed: u64) -> Result<Network> {
    Network::new(&BOTTLENECK_SHAPE, decoder_specs(m), seed)
}

pub fn build_generator_head(seed: u64) -> Result<Network> {
    Network::new(&[NOISE_DIM], generator_head_specs(), seed)
}

pub fn build_discriminator_head(seed: u64) -> Result<Network> {
    Network::new(&[FEATURE_DIM], discriminator_head_specs(), seed)
}

pub fn build_classifier(seed: u64) -> Result<Network> {
    Network::new(&[FEATURE_DIM, 1], classifier_specs(), seed)
}
