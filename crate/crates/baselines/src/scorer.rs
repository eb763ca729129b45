//! The uniform scoring interface: every method maps a flow stack to a
//! scalar where higher means more abnormal, so the evaluation harness
//! treats all models alike.

use flowdata::{flow_weight, FlowStack};
use ndcompute::Network;
use occmodels::{svdd_score, ClassifierModel, DcaeModel};

use crate::error::Result;
use crate::ocsvm::OcSvmModel;

/// Scorers are read-only after training and shareable across threads for
/// parallel evaluation.
pub trait StackScorer: Sync {
    fn name(&self) -> &str;
    /// Abnormality score; higher is more abnormal.
    fn score(&self, stack: &FlowStack) -> Result<f64>;
}

/// Mean optical-flow weight over the stack's m raw frames.
pub struct OfwScorer;

impl StackScorer for OfwScorer {
    fn name(&self) -> &str {
        "ofw"
    }

    fn score(&self, stack: &FlowStack) -> Result<f64> {
        let m = stack.frames.len() as f64;
        Ok(stack.frames.iter().map(flow_weight).sum::<f64>() / m)
    }
}

/// Reconstruction error of the pretrained autoencoder.
pub struct DcaeErrorScorer {
    pub model: DcaeModel,
}

impl StackScorer for DcaeErrorScorer {
    fn name(&self) -> &str {
        "dcae"
    }

    fn score(&self, stack: &FlowStack) -> Result<f64> {
        Ok(self.model.reconstruction_mse(&stack.tensor)?)
    }
}

/// Squared distance to the hypersphere center in DSVDD feature space.
pub struct SvddScorer {
    pub encoder: Network,
    pub center: Vec<f64>,
}

impl StackScorer for SvddScorer {
    fn name(&self) -> &str {
        "dsvdd"
    }

    fn score(&self, stack: &FlowStack) -> Result<f64> {
        Ok(svdd_score(&self.encoder, &self.center, &stack.tensor)?)
    }
}

/// Negated one-class SVM decision value over encoder features.
pub struct OcSvmScorer {
    pub encoder: Network,
    pub model: OcSvmModel,
}

impl StackScorer for OcSvmScorer {
    fn name(&self) -> &str {
        "ocsvm"
    }

    fn score(&self, stack: &FlowStack) -> Result<f64> {
        let feat = self.encoder.infer(&stack.tensor)?;
        Ok(-self.model.decision(feat.data()))
    }
}

/// Predicted likelihood of instability from a label-switch classifier on
/// encoder features (IO-GEN, GEN and N-GEN heads).
pub struct ClassifierScorer {
    pub method: String,
    pub encoder: Network,
    pub classifier: ClassifierModel,
}

impl StackScorer for ClassifierScorer {
    fn name(&self) -> &str {
        &self.method
    }

    fn score(&self, stack: &FlowStack) -> Result<f64> {
        Ok(occmodels::predict(&self.encoder, &self.classifier, &stack.tensor)?)
    }
}
