//! Comparison methods: optical-flow-weight thresholding, autoencoder
//! reconstruction error, a one-class SVM over encoder features, the plain
//! generative baseline and the noise-feature baseline, all behind one
//! stack-to-score interface.

mod error;
pub mod gen;
pub mod ngen;
pub mod ocsvm;
pub mod scorer;

pub use error::{Error, Result};
pub use gen::{train_gen, GenBaseline};
pub use ngen::{pooled_alpha, sample_noise_feature, train_ngen, AlphaMode};
pub use ocsvm::{default_gamma, train_ocsvm, train_ocsvm_grid, Kernel, OcSvmModel, DEFAULT_NU_GRID};
pub use scorer::{
    ClassifierScorer, DcaeErrorScorer, OcSvmScorer, OfwScorer, StackScorer, SvddScorer,
};
