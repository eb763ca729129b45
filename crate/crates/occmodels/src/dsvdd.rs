//! One-class deep SVDD: a fixed center in feature space, the encoder
//! fine-tuned to pull stable-class encodings toward it, and the squared
//! distance as the anomaly score.

use log::info;
use ndcompute::{Network, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arch::FEATURE_DIM;
use crate::config::{subseed, DsvddConfig};
use crate::curve::TrainingCurve;
use crate::dcae::{shuffled_batches, DcaeModel};
use crate::error::{Error, Result};

/// Coordinates of the center closer to zero than this are pushed out to
/// +-0.01 (sign-preserving), the usual guard against trivial solutions.
pub const CENTER_CLAMP: f64 = 0.01;

const COLLAPSE_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Hypersphere {
    /// Fixed 2048-dim center; never updated by any training stage.
    pub center: Vec<f64>,
    pub weight_decay: f64,
}

#[derive(Debug, Clone)]
pub struct DsvddModel {
    pub encoder: Network,
    pub sphere: Hypersphere,
    pub m: usize,
}

/// Element-wise mean of the encodings with small coordinates clamped to
/// +-CENTER_CLAMP. Exact zeros clamp to +0.01.
pub fn center_from_encodings(encodings: &[Vec<f64>]) -> Result<Vec<f64>> {
    if encodings.is_empty() {
        return Err(Error::Validation("cannot initialize center from an empty set".into()));
    }
    let dim = encodings[0].len();
    let mut center = vec![0.0; dim];
    for enc in encodings {
        if enc.len() != dim {
            return Err(Error::Validation("encoding dimension mismatch".into()));
        }
        for (c, v) in center.iter_mut().zip(enc) {
            *c += v;
        }
    }
    let n = encodings.len() as f64;
    for c in center.iter_mut() {
        *c /= n;
        if !c.is_finite() {
            return Err(Error::Diverged("non-finite center coordinate".into()));
        }
        if c.abs() < CENTER_CLAMP {
            *c = if *c < 0.0 { -CENTER_CLAMP } else { CENTER_CLAMP };
        }
    }
    Ok(center)
}

/// Mean of the encoded stable-train samples under the pretrained encoder.
pub fn init_center(encoder: &Network, train: &[&Tensor]) -> Result<Vec<f64>> {
    let mut encodings = Vec::with_capacity(train.len());
    for x in train {
        encodings.push(encoder.infer(x)?.into_data());
    }
    center_from_encodings(&encodings)
}

/// s(x): squared Euclidean distance of the encoding to the center.
pub fn svdd_score(encoder: &Network, center: &[f64], x: &Tensor) -> Result<f64> {
    let v = encoder.infer(x)?;
    Ok(squared_distance(v.data(), center))
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Fine-tunes the pretrained encoder to contract stable-class encodings
/// around the fixed center. The curve has one row per epoch with the mean
/// train distance and the summed squared weight norm; row 0 is before
/// training. Aborts on hypersphere collapse (near-zero distance variance
/// across two or more samples).
pub fn train_dsvdd(
    dcae: &DcaeModel,
    center: Vec<f64>,
    train: &[&Tensor],
    cfg: &DsvddConfig,
    seed: u64,
) -> Result<(DsvddModel, TrainingCurve)> {
    if train.is_empty() {
        return Err(Error::Validation("empty training set".into()));
    }
    if center.len() != FEATURE_DIM {
        return Err(Error::Validation(format!(
            "center must be {FEATURE_DIM}-dim, got {}",
            center.len()
        )));
    }
    let mut encoder = dcae.encoder.clone();
    let mut opt = cfg.optimizer.build();
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, "dsvdd.shuffle"));

    let mean_var_distance = |enc: &Network| -> Result<(f64, f64)> {
        let mut scores = Vec::with_capacity(train.len());
        for x in train {
            scores.push(svdd_score(enc, &center, x)?);
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / scores.len() as f64;
        Ok((mean, var))
    };

    let mut curve = TrainingCurve::new(&["epoch", "mean_distance", "weight_sq_norm"]);
    let (initial, _) = mean_var_distance(&encoder)?;
    curve.push(vec![0.0, initial, encoder.weight_sq_norm()])?;

    for epoch in 1..=cfg.epochs {
        for batch in shuffled_batches(train.len(), cfg.batch_size, &mut rng) {
            encoder.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            for &i in &batch {
                let v = encoder.forward(train[i])?;
                let grad: Vec<f64> = v
                    .data()
                    .iter()
                    .zip(&center)
                    .map(|(vi, ci)| 2.0 * (vi - ci) * scale)
                    .collect();
                encoder.backward(&Tensor::from_vec(&[FEATURE_DIM], grad)?)?;
            }
            // Frobenius weight decay: d/dW of (lambda/2)||W||^2 is lambda W.
            if cfg.weight_decay > 0.0 {
                apply_weight_decay(&mut encoder, cfg.weight_decay);
            }
            opt.step(&mut encoder)?;
        }
        let (mean, var) = mean_var_distance(&encoder)?;
        curve.push(vec![epoch as f64, mean, encoder.weight_sq_norm()])?;
        info!("dsvdd epoch {epoch}: mean distance {mean:.6}");
        if train.len() >= 2 && var < COLLAPSE_VARIANCE {
            return Err(Error::Collapse(var));
        }
    }
    encoder.clear_caches();
    Ok((
        DsvddModel {
            encoder,
            sphere: Hypersphere { center, weight_decay: cfg.weight_decay },
            m: dcae.m,
        },
        curve,
    ))
}

fn apply_weight_decay(net: &mut Network, lambda: f64) {
    // Weight tensors only; encoder layers carry no biases by design, so
    // every parameter tensor here is a weight.
    for p in net.params_mut() {
        let data: Vec<f64> = p.data().to_vec();
        let grad = p.grad_mut();
        for (g, w) in grad.iter_mut().zip(&data) {
            *g += lambda * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::input_shape;
    use rand::Rng;

    #[test]
    fn center_is_the_mean_with_clamping() {
        let a = vec![1.0; 8];
        let b = vec![3.0; 8];
        let c = center_from_encodings(&[a, b]).unwrap();
        assert!(c.iter().all(|&v| v == 2.0));

        // Coordinates near zero clamp to +-0.01 preserving sign.
        let c = center_from_encodings(&[vec![0.004, -0.004, 0.0, 0.5]]).unwrap();
        assert_eq!(c, vec![0.01, -0.01, 0.01, 0.5]);
    }

    #[test]
    fn center_matches_brute_force_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let encs: Vec<Vec<f64>> = (0..13)
            .map(|_| (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let c = center_from_encodings(&encs).unwrap();
        for j in 0..16 {
            let mean = encs.iter().map(|e| e[j]).sum::<f64>() / encs.len() as f64;
            let expected = if mean.abs() < CENTER_CLAMP {
                if mean < 0.0 {
                    -CENTER_CLAMP
                } else {
                    CENTER_CLAMP
                }
            } else {
                mean
            };
            assert!((c[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(center_from_encodings(&[]).is_err());
    }

    #[test]
    fn score_is_squared_distance() {
        // phi(x) == c gives 0; a unit offset gives exactly 1.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = DcaeModel::fresh(1, 4).unwrap();
        let shape = input_shape(1);
        let n: usize = shape.iter().product();
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Tensor::from_vec(&shape, data).unwrap();
        let phi = model.encode(&x).unwrap().into_data();
        assert_eq!(svdd_score(&model.encoder, &phi, &x).unwrap(), 0.0);

        let mut off = phi.clone();
        off[17] += 1.0;
        let s = svdd_score(&model.encoder, &off, &x).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "unit offset score {s}");
    }

    #[test]
    fn score_matches_brute_force_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let model = DcaeModel::fresh(1, 5).unwrap();
        let shape = input_shape(1);
        let n: usize = shape.iter().product();
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Tensor::from_vec(&shape, data).unwrap();
        let center: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = model.encode(&x).unwrap().into_data();
        let mut expected = 0.0;
        for j in 0..FEATURE_DIM {
            expected += (phi[j] - center[j]) * (phi[j] - center[j]);
        }
        let got = svdd_score(&model.encoder, &center, &x).unwrap();
        assert!((got - expected).abs() < 1e-10);
    }
}
