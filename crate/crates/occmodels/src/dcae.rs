//! Deep convolutional autoencoder pretraining on stable-class stacks,
//! minimizing reconstruction MSE.

use log::info;
use ndcompute::{mse, Network, Tensor};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arch::{build_decoder, build_encoder, BOTTLENECK_SHAPE, FEATURE_DIM};
use crate::config::{subseed, DcaeConfig};
use crate::curve::TrainingCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DcaeModel {
    pub encoder: Network,
    pub decoder: Network,
    pub m: usize,
}

impl DcaeModel {
    pub fn fresh(m: usize, seed: u64) -> Result<DcaeModel> {
        Ok(DcaeModel {
            encoder: build_encoder(m, subseed(seed, "dcae.encoder"))?,
            decoder: build_decoder(m, subseed(seed, "dcae.decoder"))?,
            m,
        })
    }

    pub fn encode(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.encoder.infer(x)?)
    }

    pub fn reconstruct(&self, x: &Tensor) -> Result<Tensor> {
        let v = self.encoder.infer(x)?;
        let bottleneck = v.reshaped(&BOTTLENECK_SHAPE)?;
        Ok(self.decoder.infer(&bottleneck)?)
    }

    pub fn reconstruction_mse(&self, x: &Tensor) -> Result<f64> {
        let y = self.reconstruct(x)?;
        Ok(mse(&y, x)?.0)
    }
}

pub fn shuffled_batches(n: usize, batch: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch.max(1)).map(|c| c.to_vec()).collect()
}

/// Pretrains the autoencoder. The returned curve has one row per epoch
/// with train and held-out validation MSE; row 0 is the untrained model.
pub fn train_dcae(
    train: &[&Tensor],
    cfg: &DcaeConfig,
    seed: u64,
) -> Result<(DcaeModel, TrainingCurve)> {
    if train.is_empty() {
        return Err(Error::Validation("empty training set".into()));
    }
    let m = train[0].shape()[2] / 2;
    let mut model = DcaeModel::fresh(m, seed)?;
    let mut opt_enc = cfg.optimizer.build();
    let mut opt_dec = cfg.optimizer.build();
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, "dcae.shuffle"));

    // Hold out a validation slice; a single-sample set validates on its
    // own training sample.
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((train.len() as f64 * cfg.val_fraction).ceil() as usize)
        .clamp(1, train.len().saturating_sub(1).max(1));
    let (val_idx, train_idx) = if train.len() == 1 {
        (vec![0], vec![0])
    } else {
        let v = order.split_off(order.len() - n_val);
        (v, order)
    };

    let val_mse = |model: &DcaeModel| -> Result<f64> {
        let mut acc = 0.0;
        for &i in &val_idx {
            acc += model.reconstruction_mse(train[i])?;
        }
        Ok(acc / val_idx.len() as f64)
    };

    let mut curve = TrainingCurve::new(&["epoch", "train_mse", "val_mse"]);
    let initial = val_mse(&model)?;
    curve.push(vec![0.0, initial, initial])?;

    for epoch in 1..=cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for batch in shuffled_batches(train_idx.len(), cfg.batch_size, &mut rng) {
            model.encoder.zero_grads();
            model.decoder.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            for &bi in &batch {
                let x = train[train_idx[bi]];
                let v = model.encoder.forward(x)?;
                let bottleneck = v.reshaped(&BOTTLENECK_SHAPE)?;
                let y = model.decoder.forward(&bottleneck)?;
                let (loss, mut grad) = mse(&y, x)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged(format!("reconstruction loss at epoch {epoch}")));
                }
                epoch_loss += loss;
                seen += 1;
                for g in grad.data_mut() {
                    *g *= scale;
                }
                let d_bottleneck = model.decoder.backward(&grad)?;
                let d_flat = d_bottleneck.reshaped(&[FEATURE_DIM])?;
                model.encoder.backward(&d_flat)?;
            }
            opt_enc.step(&mut model.encoder)?;
            opt_dec.step(&mut model.decoder)?;
        }
        let val = val_mse(&model)?;
        curve.push(vec![epoch as f64, epoch_loss / seen.max(1) as f64, val])?;
        info!("dcae epoch {epoch}: train {:.6} val {val:.6}", epoch_loss / seen.max(1) as f64);
    }
    model.encoder.clear_caches();
    model.decoder.clear_caches();
    Ok((model, curve))
}
