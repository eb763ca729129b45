//! Seed determinism: identical seed and inputs give bit-identical
//! parameters after N training steps.

use ndcompute::{mse, ActivationName, Adam, LayerSpec, Network, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn train_run(seed: u64, steps: usize) -> Vec<u64> {
    let specs = vec![
        LayerSpec::Conv2d { in_channels: 1, kernels: 2, kernel_size: 3, stride: 1, bias: true },
        LayerSpec::Activation { name: ActivationName::Tanh, alpha: None },
        LayerSpec::MaxPool2d { window: 2, stride: 2 },
        LayerSpec::Flatten,
        LayerSpec::Dense { in_dim: 8, out_dim: 4, bias: true },
    ];
    let mut net = Network::new(&[4, 4, 1], specs, seed).unwrap();
    let mut adam = Adam::new(1e-3, 0.5, 0.999, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
    let data: Vec<(Tensor, Tensor)> = (0..6)
        .map(|_| {
            let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (
                Tensor::from_vec(&[4, 4, 1], x).unwrap(),
                Tensor::from_vec(&[4], y).unwrap(),
            )
        })
        .collect();
    for step in 0..steps {
        let (x, y) = &data[step % data.len()];
        net.zero_grads();
        let out = net.forward(x).unwrap();
        let (_, grad) = mse(&out, y).unwrap();
        net.backward(&grad).unwrap();
        adam.step(&mut net).unwrap();
    }
    net.flat_params().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn identical_seeds_give_bit_identical_parameters() {
    let a = train_run(1234, 25);
    let b = train_run(1234, 25);
    assert_eq!(a, b);
}

#[test]
fn different_seeds_diverge() {
    let a = train_run(1234, 25);
    let b = train_run(4321, 25);
    assert_ne!(a, b);
}
