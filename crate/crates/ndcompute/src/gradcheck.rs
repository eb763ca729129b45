//! Finite-difference verification of the analytic gradients.
//!
//! The check runs the network under a fixed random linear functional
//! L(y) = sum_i probe_i * y_i and compares backpropagated parameter and
//! input gradients against central differences. Keep networks small
//! (about 1e4 parameters or fewer) since the numeric side costs two
//! forward passes per parameter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::tensor::Tensor;

pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct LayerCheck {
    pub layer: usize,
    pub kind: String,
    /// Worst relative discrepancy across this layer's parameters, or None
    /// for parameter-free layers.
    pub max_rel: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub layers: Vec<LayerCheck>,
    /// Worst relative discrepancy of the network-input gradient; this is
    /// what exercises parameter-free layers (pooling, activations).
    pub input_max_rel: f64,
    pub max_rel: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Deterministic probe coefficients for the scalar loss functional.
pub fn probe_weights(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6164_6368_6b00);
    (0..n).map(|_| rng.gen_range(0.5..1.5)).collect()
}

fn probe_loss(y: &Tensor, probe: &[f64]) -> f64 {
    y.data().iter().zip(probe).map(|(a, b)| a * b).sum()
}

/// Backpropagated gradients: one flat vector per parameter tensor (in
/// `Network::params` order) plus the input gradient.
pub fn analytic_grads(
    net: &mut Network,
    input: &Tensor,
    probe: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if net.is_frozen() {
        return Err(Error::State("cannot grad-check a frozen network".into()));
    }
    net.zero_grads();
    let y = net.forward(input)?;
    if probe.len() != y.numel() {
        return Err(Error::shape("probe", &[y.numel()], &[probe.len()]));
    }
    let dy = Tensor::from_vec(y.shape(), probe.to_vec())?;
    let dx = net.backward(&dy)?;
    let grads = net
        .params()
        .iter()
        .map(|p| p.grad().map(|g| g.to_vec()).unwrap_or_default())
        .collect();
    Ok((grads, dx.data().to_vec()))
}

/// Central-difference gradients with step `h`, same layout as
/// `analytic_grads`.
pub fn numeric_grads(
    net: &mut Network,
    input: &Tensor,
    probe: &[f64],
    h: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n_params = net.params().len();
    let mut param_grads = Vec::with_capacity(n_params);
    for pi in 0..n_params {
        let len = net.params()[pi].numel();
        let mut g = vec![0.0; len];
        for j in 0..len {
            let orig = net.params()[pi].data()[j];
            net.params_mut()[pi].data_mut()[j] = orig + h;
            let up = probe_loss(&net.infer(input)?, probe);
            net.params_mut()[pi].data_mut()[j] = orig - h;
            let down = probe_loss(&net.infer(input)?, probe);
            net.params_mut()[pi].data_mut()[j] = orig;
            g[j] = (up - down) / (2.0 * h);
        }
        param_grads.push(g);
    }

    let mut x = input.clone();
    let mut input_grad = vec![0.0; input.numel()];
    for j in 0..input.numel() {
        let orig = x.data()[j];
        x.data_mut()[j] = orig + h;
        let up = probe_loss(&net.infer(&x)?, probe);
        x.data_mut()[j] = orig - h;
        let down = probe_loss(&net.infer(&x)?, probe);
        x.data_mut()[j] = orig;
        input_grad[j] = (up - down) / (2.0 * h);
    }
    Ok((param_grads, input_grad))
}

pub fn relative_discrepancy(a: f64, b: f64) -> f64 {
    (a - b).abs() / f64::max(1.0, f64::max(a.abs(), b.abs()))
}

fn max_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_discrepancy(x, y))
        .fold(0.0, f64::max)
}

/// Builds the per-layer report from precomputed gradient sets. Exposed
/// separately so fault-injection tests can corrupt one side.
pub fn compare_grads(
    net: &Network,
    analytic: &(Vec<Vec<f64>>, Vec<f64>),
    numeric: &(Vec<Vec<f64>>, Vec<f64>),
    tolerance: f64,
) -> GradCheckReport {
    // Map flat parameter-tensor order back onto layers.
    let mut per_layer: Vec<Option<f64>> = vec![None; net.layers().len()];
    let mut pi = 0;
    for (li, layer) in net.layers().iter().enumerate() {
        let n_tensors =
            layer.weights().is_some() as usize + layer.bias().is_some() as usize;
        for _ in 0..n_tensors {
            let d = max_discrepancy(&analytic.0[pi], &numeric.0[pi]);
            let cur = per_layer[li].get_or_insert(0.0);
            *cur = cur.max(d);
            pi += 1;
        }
    }
    let layers: Vec<LayerCheck> = net
        .layers()
        .iter()
        .enumerate()
        .map(|(li, layer)| LayerCheck {
            layer: li,
            kind: layer.spec().kind_name().to_string(),
            max_rel: per_layer[li],
            pass: per_layer[li].map(|d| d <= tolerance).unwrap_or(true),
        })
        .collect();
    let input_max_rel = max_discrepancy(&analytic.1, &numeric.1);
    let max_rel = layers
        .iter()
        .filter_map(|l| l.max_rel)
        .fold(input_max_rel, f64::max);
    GradCheckReport {
        layers,
        input_max_rel,
        max_rel,
        tolerance,
        pass: max_rel <= tolerance,
    }
}

/// Full check at the default step size.
pub fn grad_check(net: &mut Network, input: &Tensor, tolerance: f64) -> Result<GradCheckReport> {
    let out_len: usize = net.output_shape().iter().product();
    let probe = probe_weights(out_len);
    let analytic = analytic_grads(net, input, &probe)?;
    let numeric = numeric_grads(net, input, &probe, DEFAULT_STEP)?;
    Ok(compare_grads(net, &analytic, &numeric, tolerance))
}
