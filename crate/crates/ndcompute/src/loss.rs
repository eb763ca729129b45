//! Loss functions returning both the value and the gradient with respect
//! to the prediction.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean squared error over all elements.
pub fn mse(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(Error::shape("mse target", pred.shape(), target.shape()));
    }
    let n = pred.numel() as f64;
    let mut loss = 0.0;
    let grad: Vec<f64> = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((loss / n, Tensor::from_vec(pred.shape(), grad)?))
}

const PROB_EPS: f64 = 1e-12;

/// Binary cross-entropy on a probability already in (0, 1). Returns the
/// loss and d(loss)/d(probability). The probability is clamped away from
/// 0 and 1 so that a saturated sigmoid cannot produce infinities.
pub fn bce(prob: f64, target: f64) -> (f64, f64) {
    let p = prob.clamp(PROB_EPS, 1.0 - PROB_EPS);
    let loss = -(target * p.ln() + (1.0 - target) * (1.0 - p).ln());
    let grad = (p - target) / (p * (1.0 - p));
    (loss, grad)
}

/// log(1 - p) and its gradient, the generator side of the saturating
/// adversarial objective.
pub fn log_one_minus(prob: f64) -> (f64, f64) {
    let p = prob.clamp(PROB_EPS, 1.0 - PROB_EPS);
    ((1.0 - p).ln(), -1.0 / (1.0 - p))
}
