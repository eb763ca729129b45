//! Minimal differentiable computation substrate: tensors, a fixed layer
//! set (2D/1D convolution, pooling, dense, activations), losses, the Adam
//! optimizer, finite-difference gradient verification, and a binary
//! parameter container.
//!
//! Everything is f64 and single-threaded; identical seeds and inputs give
//! bit-identical results. `Network::infer` is safe to call concurrently
//! through shared references.

mod activation;
mod error;
pub mod gradcheck;
mod init;
mod layer;
mod loss;
mod network;
mod optim;
pub mod serialize;
mod tensor;

pub use activation::ActivationName;
pub use error::{Error, Result};
pub use gradcheck::{grad_check, GradCheckReport};
pub use init::Init;
pub use layer::{Layer, LayerSpec};
pub use loss::{bce, log_one_minus, mse};
pub use network::Network;
pub use optim::Adam;
pub use tensor::Tensor;
