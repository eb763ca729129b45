//! Sequential networks over the fixed layer set.
//!
//! A network validates its layer chain against a declared input shape at
//! construction time, so shape errors surface as configuration errors
//! naming the offending layer rather than as mid-training panics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::init::infer_init;
use crate::layer::{Layer, LayerSpec};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct Network {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
    /// Shape at each layer boundary; `shapes[0]` is the input shape.
    shapes: Vec<Vec<usize>>,
    frozen: bool,
}

impl Network {
    /// Builds a network with freshly initialized parameters.
    pub fn new(input_shape: &[usize], specs: Vec<LayerSpec>, seed: u64) -> Result<Network> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(input_shape, specs, |spec, i, specs| {
            let w = match spec.fans() {
                Some((fan_in, fan_out)) => {
                    infer_init(specs, i).sample(fan_in, fan_out, spec.weight_len(), &mut rng)
                }
                None => Vec::new(),
            };
            let b = vec![0.0; spec.bias_len()];
            (w, b)
        })
    }

    /// Builds a network from explicit parameter vectors (deserialization,
    /// replicas of trained models).
    pub fn from_params(
        input_shape: &[usize],
        records: Vec<(LayerSpec, Option<Vec<f64>>, Option<Vec<f64>>)>,
    ) -> Result<Network> {
        let mut weights = Vec::with_capacity(records.len());
        let mut specs = Vec::with_capacity(records.len());
        for (spec, w, b) in records {
            weights.push((w, b));
            specs.push(spec);
        }
        let mut weights = weights.into_iter();
        let net = Self::build(input_shape, specs, |spec, i, _| {
            let (w, b) = weights.next().unwrap();
            let w = w.unwrap_or_default();
            let b = b.unwrap_or_default();
            assert_eq!(
                w.len(),
                spec.weight_len(),
                "weight length mismatch at layer {i}"
            );
            assert_eq!(b.len(), spec.bias_len(), "bias length mismatch at layer {i}");
            (w, b)
        })?;
        Ok(net)
    }

    fn build<F>(input_shape: &[usize], specs: Vec<LayerSpec>, mut params: F) -> Result<Network>
    where
        F: FnMut(&LayerSpec, usize, &[LayerSpec]) -> (Vec<f64>, Vec<f64>),
    {
        let mut shapes = vec![input_shape.to_vec()];
        let mut layers = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let context = format!("layer {} ({})", i, spec.kind_name());
            spec.validate(&context)?;
            let next = spec.output_shape(shapes.last().unwrap(), &context)?;
            shapes.push(next);
        }
        for (i, spec) in specs.iter().enumerate() {
            let (w, b) = params(spec, i, &specs);
            let weights = if spec.weight_len() > 0 {
                Some(Tensor::from_vec(&[spec.weight_len()], w)?)
            } else {
                None
            };
            let bias = if spec.bias_len() > 0 {
                Some(Tensor::from_vec(&[spec.bias_len()], b)?)
            } else {
                None
            };
            layers.push(Layer::new(spec.clone(), weights, bias));
        }
        Ok(Network {
            input_shape: input_shape.to_vec(),
            layers,
            shapes,
            frozen: false,
        })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        self.shapes.last().unwrap()
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec().clone()).collect()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Frozen networks skip parameter-gradient accumulation in `backward`
    /// but still propagate input gradients, which is what lets upstream
    /// generators learn through fixed downstream networks.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Training forward pass; caches per-layer inputs for `backward`.
    pub fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(Error::shape("network input", &self.input_shape, input.shape()));
        }
        let mut x = input.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let context = format!("layer {} ({})", i, layer.spec().kind_name());
            x = layer.forward(&x, &context)?;
            x.check_finite(&context)?;
        }
        Ok(x)
    }

    /// Inference pass; no caches, usable through a shared reference.
    pub fn infer(&self, input: &Tensor) -> Result<Tensor> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(Error::shape("network input", &self.input_shape, input.shape()));
        }
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let context = format!("layer {} ({})", i, layer.spec().kind_name());
            x = layer.infer(&x, &context)?;
            x.check_finite(&context)?;
        }
        Ok(x)
    }

    /// Backpropagates `grad_out`, accumulating parameter gradients, and
    /// returns the gradient with respect to the network input.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        if grad_out.shape() != self.output_shape() {
            return Err(Error::shape(
                "network output gradient",
                self.output_shape(),
                grad_out.shape(),
            ));
        }
        let frozen = self.frozen;
        let mut g = grad_out.clone();
        for (i, layer) in self.layers.iter_mut().enumerate().rev() {
            let context = format!("layer {} ({})", i, layer.spec().kind_name());
            g = layer.backward(&g, frozen, &context)?;
            g.check_finite(&context)?;
        }
        Ok(g)
    }

    pub fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            if let Some(w) = layer.weights.as_mut() {
                w.zero_grad();
            }
            if let Some(b) = layer.bias.as_mut() {
                b.zero_grad();
            }
        }
    }

    pub fn clear_caches(&mut self) {
        for layer in &mut self.layers {
            layer.clear_cache();
        }
    }

    /// Trainable parameter tensors in a fixed order (weights before bias,
    /// layers front to back).
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            if let Some(w) = layer.weights.as_ref() {
                out.push(w);
            }
            if let Some(b) = layer.bias.as_ref() {
                out.push(b);
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            if let Some(w) = layer.weights.as_mut() {
                out.push(w);
            }
            if let Some(b) = layer.bias.as_mut() {
                out.push(b);
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.numel()).sum()
    }

    /// Flat copy of all parameter values, for digests and change checks.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for p in self.params() {
            out.extend_from_slice(p.data());
        }
        out
    }

    /// Sum of squared weight norms (biases excluded), the weight-decay
    /// regularizer term.
    pub fn weight_sq_norm(&self) -> f64 {
        self.layers
            .iter()
            .filter_map(|l| l.weights.as_ref())
            .map(|w| w.data().iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn check_params_finite(&self) -> Result<()> {
        for (i, p) in self.params().iter().enumerate() {
            if !p.all_finite() {
                return Err(Error::NonFinite(format!("parameter tensor {i}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationName;

    fn tiny_specs() -> Vec<LayerSpec> {
        vec![
            LayerSpec::Conv2d { in_channels: 1, kernels: 2, kernel_size: 3, stride: 1, bias: true },
            LayerSpec::Activation { name: ActivationName::Relu, alpha: None },
            LayerSpec::MaxPool2d { window: 2, stride: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dense { in_dim: 8, out_dim: 3, bias: true },
        ]
    }

    #[test]
    fn shape_chain_is_validated_at_build() {
        let net = Network::new(&[4, 4, 1], tiny_specs(), 1).unwrap();
        assert_eq!(net.output_shape(), &[3]);

        // Dense expecting 8 inputs cannot follow a 4x4 spatial chain of
        // the wrong channel count.
        let err = Network::new(&[4, 4, 2], tiny_specs(), 1).unwrap_err();
        assert!(err.to_string().contains("layer 0"), "{err}");
    }

    #[test]
    fn forward_rejects_wrong_input_shape() {
        let mut net = Network::new(&[4, 4, 1], tiny_specs(), 1).unwrap();
        let bad = Tensor::zeros(&[4, 4, 2]);
        assert!(net.forward(&bad).is_err());
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = Network::new(&[4, 4, 1], tiny_specs(), 7).unwrap();
        let b = Network::new(&[4, 4, 1], tiny_specs(), 7).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        let c = Network::new(&[4, 4, 1], tiny_specs(), 8).unwrap();
        assert_ne!(a.flat_params(), c.flat_params());
    }

    #[test]
    fn frozen_network_propagates_input_grads_without_param_grads() {
        let mut net = Network::new(&[4, 4, 1], tiny_specs(), 3).unwrap();
        net.set_frozen(true);
        let x = Tensor::filled(&[4, 4, 1], 0.5);
        let y = net.forward(&x).unwrap();
        let g = Tensor::filled(y.shape(), 1.0);
        let dx = net.backward(&g).unwrap();
        assert_eq!(dx.shape(), &[4, 4, 1]);
        assert!(dx.data().iter().any(|&v| v != 0.0));
        for p in net.params() {
            assert!(p.grad().is_none(), "frozen layer accumulated a gradient");
        }
    }

    #[test]
    fn infer_matches_forward() {
        let mut net = Network::new(&[4, 4, 1], tiny_specs(), 5).unwrap();
        let x = Tensor::from_vec(&[4, 4, 1], (0..16).map(|i| i as f64 * 0.1).collect()).unwrap();
        let a = net.forward(&x).unwrap();
        let b = net.infer(&x).unwrap();
        assert_eq!(a.data(), b.data());
    }
}
