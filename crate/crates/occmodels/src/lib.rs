//! The trained models and their procedures: DCAE pretraining, DSVDD
//! fine-tuning around a fixed center, adversarial inner-outlier
//! generation with feature matching, and the label-switch classifier.

pub mod arch;
pub mod bundle;
pub mod classifier;
pub mod config;
pub mod curve;
pub mod dcae;
pub mod dsvdd;
mod error;
pub mod iogen;
pub mod pipeline;

pub use classifier::{predict, train_label_switch_classifier, ClassifierModel};
pub use config::{AdamConfig, ClassifierConfig, DcaeConfig, DsvddConfig, IoGenConfig};
pub use curve::TrainingCurve;
pub use dcae::{train_dcae, DcaeModel};
pub use dsvdd::{init_center, svdd_score, train_dsvdd, DsvddModel, Hypersphere};
pub use error::{Error, Result};
pub use iogen::{sample_noise, train_iogen, CollapseDetector, IoGenModel};
pub use pipeline::{PipelineState, StageRecord};
