use serde::{Deserialize, Serialize};

/// Activation functions available to `LayerSpec::Activation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationName {
    Relu,
    LeakyRelu,
    Tanh,
    Sigmoid,
}

impl ActivationName {
    pub fn apply(self, x: f64, alpha: f64) -> f64 {
        match self {
            ActivationName::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            ActivationName::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            ActivationName::Tanh => x.tanh(),
            ActivationName::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// Derivative with respect to the pre-activation input.
    pub fn derivative(self, x: f64, alpha: f64) -> f64 {
        match self {
            ActivationName::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationName::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            ActivationName::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationName::Sigmoid => {
                let s = 1.0 / (1.0 + (-x).exp());
                s * (1.0 - s)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActivationName::Relu => "relu",
            ActivationName::LeakyRelu => "leaky_relu",
            ActivationName::Tanh => "tanh",
            ActivationName::Sigmoid => "sigmoid",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_at_zero_is_half() {
        assert_eq!(ActivationName::Sigmoid.apply(0.0, 0.0), 0.5);
    }

    #[test]
    fn leaky_relu_uses_alpha_below_zero() {
        assert_eq!(ActivationName::LeakyRelu.apply(-2.0, 0.3), -0.6);
        assert_eq!(ActivationName::LeakyRelu.derivative(-2.0, 0.3), 0.3);
        assert_eq!(ActivationName::LeakyRelu.apply(2.0, 0.3), 2.0);
    }

    #[test]
    fn tanh_stays_in_range() {
        for x in [-50.0, -1.0, 0.0, 1.0, 50.0] {
            let y = ActivationName::Tanh.apply(x, 0.0);
            assert!((-1.0..=1.0).contains(&y));
        }
    }
}
