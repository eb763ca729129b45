//! Property-style round-trip checks for the binary parameter container
//! over randomly generated architectures.

use ndcompute::serialize::{read_network, write_network};
use ndcompute::{ActivationName, LayerSpec, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_net(seed: u64) -> (Network, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::new();
    let mut shape = vec![8usize, 8, 1 + rng.gen_range(0..3)];
    let convs = rng.gen_range(1..3);
    for _ in 0..convs {
        let kernels = rng.gen_range(1..5);
        specs.push(LayerSpec::Conv2d {
            in_channels: shape[2],
            kernels,
            kernel_size: 3,
            stride: 1,
            bias: rng.gen_bool(0.5),
        });
        shape[2] = kernels;
        let name = match rng.gen_range(0..4) {
            0 => ActivationName::Relu,
            1 => ActivationName::LeakyRelu,
            2 => ActivationName::Tanh,
            _ => ActivationName::Sigmoid,
        };
        let alpha = (name == ActivationName::LeakyRelu).then_some(0.3);
        specs.push(LayerSpec::Activation { name, alpha });
        if shape[0] % 2 == 0 && rng.gen_bool(0.5) {
            specs.push(LayerSpec::MaxPool2d { window: 2, stride: 2 });
            shape[0] /= 2;
            shape[1] /= 2;
        }
    }
    specs.push(LayerSpec::Flatten);
    let flat = shape[0] * shape[1] * shape[2];
    specs.push(LayerSpec::Dense {
        in_dim: flat,
        out_dim: rng.gen_range(1..4),
        bias: rng.gen_bool(0.5),
    });
    let input_shape = vec![8, 8, specs_input_channels(&specs)];
    (Network::new(&input_shape, specs, seed).unwrap(), input_shape)
}

fn specs_input_channels(specs: &[LayerSpec]) -> usize {
    match specs[0] {
        LayerSpec::Conv2d { in_channels, .. } => in_channels,
        _ => unreachable!(),
    }
}

#[test]
fn random_networks_roundtrip_bit_exact() {
    for seed in 0..25 {
        let (net, input_shape) = random_net(seed);
        let mut bytes = Vec::new();
        write_network(&net, &mut bytes).unwrap();
        let back = read_network(&bytes[..], &input_shape).unwrap();
        assert_eq!(net.specs(), back.specs(), "seed {seed}");
        let a = net.flat_params();
        let b = back.flat_params();
        assert_eq!(a.len(), b.len(), "seed {seed}");
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits(), "seed {seed}");
        }
    }
}
