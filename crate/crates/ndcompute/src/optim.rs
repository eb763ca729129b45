//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::network::Network;

#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Adam {
        assert!(learning_rate > 0.0, "learning rate must be positive");
        assert!((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2));
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update to every trainable parameter of `net` from its
    /// accumulated gradients, then checks the result for finiteness.
    /// Gradients are left untouched; call `zero_grads` before the next
    /// accumulation pass.
    pub fn step(&mut self, net: &mut Network) -> Result<()> {
        let mut params = net.params_mut();
        if self.first_moment.is_empty() {
            self.first_moment = params.iter().map(|p| vec![0.0; p.numel()]).collect();
            self.second_moment = params.iter().map(|p| vec![0.0; p.numel()]).collect();
        }
        if self.first_moment.len() != params.len() {
            return Err(Error::State(format!(
                "optimizer bound to {} parameter tensors, network has {}",
                self.first_moment.len(),
                params.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, p) in params.iter_mut().enumerate() {
            if self.first_moment[i].len() != p.numel() {
                return Err(Error::State(format!(
                    "moment buffer {i} has length {}, parameter has {}",
                    self.first_moment[i].len(),
                    p.numel()
                )));
            }
            let grad = p
                .grad()
                .ok_or_else(|| Error::State(format!("parameter tensor {i} has no gradient")))?
                .to_vec();
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            let data = p.data_mut();
            for j in 0..data.len() {
                let g = grad[j];
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                data[j] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                if !data[j].is_finite() {
                    return Err(Error::NonFinite(format!(
                        "parameter tensor {i} after adam step {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::LayerSpec;
    use crate::tensor::Tensor;

    fn one_param_net(w0: f64) -> Network {
        let records = vec![(
            LayerSpec::Dense { in_dim: 1, out_dim: 1, bias: false },
            Some(vec![w0]),
            None,
        )];
        Network::from_params(&[1], records).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters_untouched() {
        let mut net = one_param_net(0.7);
        net.params_mut()[0].grad_mut();
        let mut adam = Adam::new(0.1, 0.9, 0.999, 1e-8);
        adam.step(&mut net).unwrap();
        assert_eq!(net.params()[0].data()[0], 0.7);
    }

    #[test]
    fn missing_gradient_is_a_state_error() {
        let mut net = one_param_net(0.7);
        let mut adam = Adam::new(0.1, 0.9, 0.999, 1e-8);
        assert!(matches!(adam.step(&mut net), Err(Error::State(_))));
    }

    #[test]
    fn constant_gradient_moves_parameter_against_its_sign() {
        let mut net = one_param_net(0.0);
        let mut adam = Adam::new(0.01, 0.9, 0.999, 1e-8);
        let mut prev = 0.0;
        for _ in 0..50 {
            net.zero_grads();
            net.params_mut()[0].grad_mut()[0] = 2.5;
            adam.step(&mut net).unwrap();
            let w = net.params()[0].data()[0];
            assert!(w < prev, "positive gradient must decrease the parameter");
            prev = w;
        }
    }

    #[test]
    fn quadratic_converges_and_matches_scalar_recurrence() {
        // f(w) = w^2, grad = 2w, lr = 0.1, 200 steps from w0 = 1.
        let (lr, b1, b2, eps) = (0.1, 0.9, 0.999, 1e-8);
        let mut net = one_param_net(1.0);
        let mut adam = Adam::new(lr, b1, b2, eps);

        // Independent scalar recurrence as the oracle.
        let (mut w_ref, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for t in 1..=200 {
            let g = 2.0 * w_ref;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t));
            let v_hat = v / (1.0 - b2.powi(t));
            w_ref -= lr * m_hat / (v_hat.sqrt() + eps);

            net.zero_grads();
            let w = net.params()[0].data()[0];
            net.params_mut()[0].grad_mut()[0] = 2.0 * w;
            adam.step(&mut net).unwrap();
        }
        let w = net.params()[0].data()[0];
        assert!((w - w_ref).abs() < 1e-12, "implementation {w} vs oracle {w_ref}");
        assert!(w.abs() < 0.05, "did not converge: {w}");
    }
}
