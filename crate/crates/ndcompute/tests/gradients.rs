//! Finite-difference gradient suite: every layer kind on randomized small
//! instances, away from ReLU kinks and pooling ties.

use ndcompute::gradcheck::{self, grad_check};
use ndcompute::{ActivationName, LayerSpec, Network, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-4;
const INSTANCES: usize = 20;

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::from_vec(shape, data).unwrap()
}

/// Input whose pool windows have clear winners and whose values stay away
/// from activation kinks, so a 1e-5 central difference cannot cross one.
fn well_separated_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    loop {
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let kink_safe = data.iter().all(|v| v.abs() > 1e-3);
        let mut sorted: Vec<f64> = data.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tie_safe = sorted.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-3);
        if kink_safe && tie_safe {
            return Tensor::from_vec(shape, data).unwrap();
        }
    }
}

fn check_many(name: &str, build: impl Fn(u64) -> (Network, Tensor)) {
    for seed in 0..INSTANCES as u64 {
        let (mut net, input) = build(seed);
        let report = grad_check(&mut net, &input, TOL).unwrap();
        assert!(
            report.pass,
            "{name} instance {seed}: max_rel {} > {TOL}",
            report.max_rel
        );
    }
}

#[test]
fn conv2d_gradients() {
    check_many("conv2d", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::Conv2d {
            in_channels: 2,
            kernels: 3,
            kernel_size: 3,
            stride: 1,
            bias: true,
        }];
        let net = Network::new(&[5, 5, 2], specs, seed ^ 0xA5).unwrap();
        let x = random_tensor(&[5, 5, 2], &mut rng);
        (net, x)
    });
}

#[test]
fn conv1d_gradients() {
    check_many("conv1d", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::Conv1d {
            in_channels: 2,
            kernels: 4,
            kernel_size: 3,
            stride: 1,
            bias: true,
        }];
        let net = Network::new(&[9, 2], specs, seed ^ 0xB6).unwrap();
        let x = random_tensor(&[9, 2], &mut rng);
        (net, x)
    });
}

#[test]
fn dense_gradients() {
    check_many("dense", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::Dense { in_dim: 6, out_dim: 4, bias: true }];
        let net = Network::new(&[6], specs, seed ^ 0xC7).unwrap();
        let x = random_tensor(&[6], &mut rng);
        (net, x)
    });
}

#[test]
fn maxpool2d_gradients() {
    check_many("maxpool2d", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::MaxPool2d { window: 2, stride: 2 }];
        let net = Network::new(&[4, 4, 2], specs, 0).unwrap();
        let x = well_separated_tensor(&[4, 4, 2], &mut rng);
        (net, x)
    });
}

#[test]
fn avgpool1d_gradients() {
    check_many("avgpool1d", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::AvgPool1d { window: 2, stride: 2 }];
        let net = Network::new(&[8, 3], specs, 0).unwrap();
        let x = random_tensor(&[8, 3], &mut rng);
        (net, x)
    });
}

#[test]
fn upsample2d_gradients() {
    check_many("upsample2d", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::Upsample2d { factor: 2 }];
        let net = Network::new(&[3, 3, 2], specs, 0).unwrap();
        let x = random_tensor(&[3, 3, 2], &mut rng);
        (net, x)
    });
}

#[test]
fn flatten_gradients() {
    check_many("flatten", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![LayerSpec::Flatten];
        let net = Network::new(&[3, 3, 2], specs, 0).unwrap();
        let x = random_tensor(&[3, 3, 2], &mut rng);
        (net, x)
    });
}

#[test]
fn activation_gradients() {
    let names = [
        (ActivationName::Relu, None),
        (ActivationName::LeakyRelu, Some(0.3)),
        (ActivationName::Tanh, None),
        (ActivationName::Sigmoid, None),
    ];
    for (name, alpha) in names {
        check_many(name.as_str(), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let specs = vec![LayerSpec::Activation { name, alpha }];
            let net = Network::new(&[12], specs, 0).unwrap();
            let x = well_separated_tensor(&[12], &mut rng);
            (net, x)
        });
    }
}

#[test]
fn three_layer_network_matches_finite_differences() {
    check_many("3-layer", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![
            LayerSpec::Conv2d { in_channels: 1, kernels: 3, kernel_size: 3, stride: 1, bias: true },
            LayerSpec::Activation { name: ActivationName::Tanh, alpha: None },
            LayerSpec::MaxPool2d { window: 2, stride: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dense { in_dim: 27, out_dim: 5, bias: true },
            LayerSpec::Activation { name: ActivationName::Sigmoid, alpha: None },
        ];
        let net = Network::new(&[6, 6, 1], specs, seed ^ 0xD8).unwrap();
        let x = well_separated_tensor(&[6, 6, 1], &mut rng);
        (net, x)
    });
}

#[test]
fn relu_network_passes_away_from_kinks() {
    // Bias magnitudes keep pre-activations off zero; inputs are separated.
    for seed in 0..INSTANCES as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let specs = vec![
            LayerSpec::Dense { in_dim: 5, out_dim: 6, bias: true },
            LayerSpec::Activation { name: ActivationName::Relu, alpha: None },
            LayerSpec::Dense { in_dim: 6, out_dim: 2, bias: true },
        ];
        let mut net = Network::new(&[5], specs, seed ^ 0xE9).unwrap();
        let x = loop {
            let cand = well_separated_tensor(&[5], &mut rng);
            // Reject draws whose hidden pre-activations graze a kink.
            let hidden = {
                let mut probe = Network::from_params(
                    &[5],
                    vec![(
                        net.layers()[0].spec().clone(),
                        net.layers()[0].weights().map(|w| w.data().to_vec()),
                        net.layers()[0].bias().map(|b| b.data().to_vec()),
                    )],
                )
                .unwrap();
                probe.infer(&cand).unwrap()
            };
            if hidden.data().iter().all(|v| v.abs() > 1e-3) {
                break cand;
            }
        };
        let report = grad_check(&mut net, &x, TOL).unwrap();
        assert!(report.pass, "relu instance {seed}: {}", report.max_rel);
    }
}

#[test]
fn frozen_subnetwork_keeps_grads_absent_while_input_grads_flow() {
    let specs = vec![
        LayerSpec::Dense { in_dim: 4, out_dim: 4, bias: true },
        LayerSpec::Activation { name: ActivationName::Tanh, alpha: None },
    ];
    let mut frozen = Network::new(&[4], specs, 21).unwrap();
    frozen.set_frozen(true);
    let x = Tensor::from_vec(&[4], vec![0.2, -0.4, 0.6, 0.8]).unwrap();
    frozen.forward(&x).unwrap();
    let dy = Tensor::filled(&[4], 1.0);
    let dx = frozen.backward(&dy).unwrap();
    assert!(dx.data().iter().any(|&v| v.abs() > 1e-9));
    for p in frozen.params() {
        assert!(p.grad().is_none());
    }

    // The propagated input gradient must still be correct: compare with
    // the unfrozen copy of the same network.
    let mut open = frozen.clone();
    open.set_frozen(false);
    open.forward(&x).unwrap();
    let dx_open = open.backward(&dy).unwrap();
    assert_eq!(dx.data(), dx_open.data());
}

#[test]
fn linear_network_discrepancy_is_tiny() {
    let specs = vec![
        LayerSpec::Dense { in_dim: 5, out_dim: 4, bias: true },
        LayerSpec::Dense { in_dim: 4, out_dim: 2, bias: false },
    ];
    let mut net = Network::new(&[5], specs, 33).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let x = random_tensor(&[5], &mut rng);
    let report = grad_check(&mut net, &x, 1e-7).unwrap();
    assert!(report.pass, "linear discrepancy {} >= 1e-7", report.max_rel);
}

#[test]
fn report_localizes_an_injected_fault() {
    let specs = vec![
        LayerSpec::Dense { in_dim: 4, out_dim: 3, bias: true },
        LayerSpec::Activation { name: ActivationName::Tanh, alpha: None },
        LayerSpec::Dense { in_dim: 3, out_dim: 2, bias: true },
    ];
    let mut net = Network::new(&[4], specs, 55).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let x = random_tensor(&[4], &mut rng);
    let probe = gradcheck::probe_weights(2);
    let mut analytic = gradcheck::analytic_grads(&mut net, &x, &probe).unwrap();
    let numeric = gradcheck::numeric_grads(&mut net, &x, &probe, gradcheck::DEFAULT_STEP).unwrap();
    for g in &mut analytic.0[0] {
        *g *= 2.0;
    }
    let report = gradcheck::compare_grads(&net, &analytic, &numeric, TOL);
    assert!(!report.layers[0].pass);
    assert!(report.layers[2].pass);
}
