//! Inner-outlier generator: adversarial training against a reinitialized
//! discriminator plus feature matching that pulls the batch-mean encoding
//! of generated flows toward the DSVDD center. The DSVDD encoder stays
//! frozen throughout; gradients flow through it into the generator.
//!
//! The same alternating loop also serves the plain generative baseline,
//! which matches the discriminator's own hidden features of real data
//! instead of the center.

use log::info;
use ndcompute::{bce, log_one_minus, Network, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::arch::{
    build_discriminator_head, build_encoder, build_generator_head, BOTTLENECK_SHAPE, FEATURE_DIM,
    NOISE_DIM,
};
use crate::config::{subseed, IoGenConfig};
use crate::curve::TrainingCurve;
use crate::dcae::{shuffled_batches, DcaeModel};
use crate::dsvdd::{squared_distance, DsvddModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct IoGenModel {
    pub generator_head: Network,
    pub generator_decoder: Network,
    pub discriminator_body: Network,
    pub discriminator_head: Network,
    pub sigma: f64,
    pub lambda_feat: f64,
    pub m: usize,
}

impl IoGenModel {
    /// G(z): noise vector to synthetic flow stack in [-1, 1].
    pub fn generate(&self, z: &Tensor) -> Result<Tensor> {
        let v = self.generator_head.infer(z)?;
        let bottleneck = v.reshaped(&BOTTLENECK_SHAPE)?;
        Ok(self.generator_decoder.infer(&bottleneck)?)
    }

    /// D(x): probability that x is a real flow stack.
    pub fn discriminate(&self, x: &Tensor) -> Result<f64> {
        let feat = self.discriminator_body.infer(x)?;
        Ok(self.discriminator_head.infer(&feat)?.data()[0])
    }
}

/// What the generator's feature-matching term is anchored to.
pub enum FeatureObjective {
    /// Batch-mean encoding under a frozen external encoder must approach
    /// the fixed center (the inner-outlier objective).
    CenterInEncoder { encoder: Network, center: Vec<f64> },
    /// Batch-mean discriminator hidden features of generated data must
    /// approach those of real data (the plain baseline objective).
    DiscriminatorRealMean,
}

/// Draws z from the zero-mean normal prior with std sigma.
pub fn sample_noise(sigma: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let normal = Normal::new(0.0, sigma).expect("sigma must be positive and finite");
    let data: Vec<f64> = (0..NOISE_DIM).map(|_| normal.sample(rng)).collect();
    Tensor::from_vec(&[NOISE_DIM], data).expect("noise shape")
}

/// Flags mode collapse after `required` consecutive low-variance checks.
#[derive(Debug, Clone)]
pub struct CollapseDetector {
    pub threshold: f64,
    pub required: usize,
    streak: usize,
}

impl CollapseDetector {
    pub fn new(threshold: f64, required: usize) -> CollapseDetector {
        CollapseDetector { threshold, required, streak: 0 }
    }

    /// Returns true once the streak reaches the required length.
    pub fn observe(&mut self, variance: f64) -> bool {
        if variance < self.threshold {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak >= self.required
    }
}

struct BatchCycler {
    order: Vec<usize>,
    pos: usize,
}

impl BatchCycler {
    fn new(n: usize, rng: &mut ChaCha8Rng) -> BatchCycler {
        let order = shuffled_batches(n, n, rng).pop().unwrap_or_default();
        BatchCycler { order, pos: 0 }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> usize {
        if self.pos >= self.order.len() {
            self.order = shuffled_batches(self.order.len(), self.order.len(), rng)
                .pop()
                .unwrap_or_default();
            self.pos = 0;
        }
        let i = self.order[self.pos];
        self.pos += 1;
        i
    }
}

/// Trains IO-GEN: the generator decoder starts as a replica of the
/// pretrained DCAE decoder, the discriminator reuses the encoder
/// architecture with reinitialized weights, and feature matching anchors
/// generated encodings to the hypersphere center.
pub fn train_iogen(
    dsvdd: &DsvddModel,
    dcae: &DcaeModel,
    train: &[&Tensor],
    cfg: &IoGenConfig,
    seed: u64,
) -> Result<(IoGenModel, TrainingCurve)> {
    let mut phi = dsvdd.encoder.clone();
    phi.set_frozen(true);
    train_gan(
        dcae,
        train,
        cfg,
        seed,
        FeatureObjective::CenterInEncoder { encoder: phi, center: dsvdd.sphere.center.clone() },
    )
}

/// Alternating GAN training shared by IO-GEN and the plain baseline.
pub fn train_gan(
    dcae: &DcaeModel,
    train: &[&Tensor],
    cfg: &IoGenConfig,
    seed: u64,
    objective: FeatureObjective,
) -> Result<(IoGenModel, TrainingCurve)> {
    if train.is_empty() {
        return Err(Error::Validation("empty training set".into()));
    }
    if cfg.sigma <= 0.0 {
        return Err(Error::Validation("sigma must be positive".into()));
    }
    let m = dcae.m;
    // A frozen external encoder, when the objective carries one.
    let (mut phi, center): (Option<Network>, Option<Vec<f64>>) = match objective {
        FeatureObjective::CenterInEncoder { encoder, center } => (Some(encoder), Some(center)),
        FeatureObjective::DiscriminatorRealMean => (None, None),
    };
    let mut model = IoGenModel {
        generator_head: build_generator_head(subseed(seed, "gan.g_head"))?,
        // Replica of the pretrained decoder: realistic synthesis starts
        // from reconstruction knowledge.
        generator_decoder: dcae.decoder.clone(),
        // The discriminator reuses the encoder architecture with all
        // weights reinitialized.
        discriminator_body: build_encoder(m, subseed(seed, "gan.d_body"))?,
        discriminator_head: build_discriminator_head(subseed(seed, "gan.d_head"))?,
        sigma: cfg.sigma,
        lambda_feat: cfg.lambda_feat,
        m,
    };
    let mut opt_g_head = cfg.generator.build();
    let mut opt_g_dec = cfg.generator.build();
    let mut opt_d_body = cfg.discriminator.build();
    let mut opt_d_head = cfg.discriminator.build();

    let mut noise_rng = ChaCha8Rng::seed_from_u64(subseed(seed, "gan.noise"));
    let mut data_rng = ChaCha8Rng::seed_from_u64(subseed(seed, "gan.shuffle"));
    let mut cycler = BatchCycler::new(train.len(), &mut data_rng);
    let mut detector = CollapseDetector::new(1e-6, 5);

    let mut curve = TrainingCurve::new(&[
        "iteration",
        "d_loss",
        "g_adv",
        "g_feat",
        "gen_mean_svdd",
        "gen_pixel_var",
    ]);

    let batch = cfg.batch_size.max(1);
    for iter in 0..cfg.iterations {
        // ---- Discriminator ascent on log D(x) + log(1 - D(G(z))) ----
        let mut d_loss = 0.0;
        for _ in 0..cfg.d_steps_per_g.max(1) {
            model.discriminator_body.set_frozen(false);
            model.discriminator_head.set_frozen(false);
            model.discriminator_body.zero_grads();
            model.discriminator_head.zero_grads();
            let scale = 1.0 / batch as f64;
            for _ in 0..batch {
                let x = train[cycler.next(&mut data_rng)];
                let feat = model.discriminator_body.forward(x)?;
                let p = model.discriminator_head.forward(&feat)?.data()[0];
                let (loss, dp) = bce(p, 1.0);
                d_loss += loss * scale;
                let dfeat = model
                    .discriminator_head
                    .backward(&Tensor::from_vec(&[1], vec![dp * scale])?)?;
                model.discriminator_body.backward(&dfeat)?;
            }
            for _ in 0..batch {
                let z = sample_noise(cfg.sigma, &mut noise_rng);
                let fake = model.generate(&z)?;
                let feat = model.discriminator_body.forward(&fake)?;
                let p = model.discriminator_head.forward(&feat)?.data()[0];
                let (loss, dp) = bce(p, 0.0);
                d_loss += loss * scale;
                let dfeat = model
                    .discriminator_head
                    .backward(&Tensor::from_vec(&[1], vec![dp * scale])?)?;
                model.discriminator_body.backward(&dfeat)?;
            }
            opt_d_body.step(&mut model.discriminator_body)?;
            opt_d_head.step(&mut model.discriminator_head)?;
        }

        // ---- Generator descent ----
        model.discriminator_body.set_frozen(true);
        model.discriminator_head.set_frozen(true);
        model.generator_head.zero_grads();
        model.generator_decoder.zero_grads();

        // Pass 1: fix the z batch and the generated samples, collect the
        // matching features and diagnostic statistics.
        let zs: Vec<Tensor> = (0..batch).map(|_| sample_noise(cfg.sigma, &mut noise_rng)).collect();
        let mut fakes = Vec::with_capacity(batch);
        for z in &zs {
            fakes.push(model.generate(z)?);
        }
        let mut px_sum = 0.0;
        let mut px_sq = 0.0;
        let mut px_n = 0.0;
        for fake in &fakes {
            for &v in fake.data() {
                px_sum += v;
                px_sq += v * v;
                px_n += 1.0;
            }
        }
        let pixel_var = px_sq / px_n - (px_sum / px_n) * (px_sum / px_n);

        let mut match_feats = Vec::with_capacity(batch);
        for fake in &fakes {
            let feat = match &phi {
                Some(enc) => enc.infer(fake)?,
                None => model.discriminator_body.infer(fake)?,
            };
            match_feats.push(feat.into_data());
        }
        let mut match_mean = vec![0.0; FEATURE_DIM];
        for f in &match_feats {
            for (mj, fj) in match_mean.iter_mut().zip(f) {
                *mj += fj / batch as f64;
            }
        }
        // Diagnostic: mean squared distance of the matching features to
        // the center, or to their own batch mean for the plain baseline.
        let anchor = center.as_deref().unwrap_or(&match_mean);
        let gen_mean_svdd = match_feats
            .iter()
            .map(|f| squared_distance(f, anchor))
            .sum::<f64>()
            / batch as f64;

        // The matching target: the fixed center, or this iteration's
        // batch-mean discriminator features of real data.
        let target: Vec<f64> = match &center {
            Some(c) => c.clone(),
            None => {
                let mut mean = vec![0.0; FEATURE_DIM];
                for _ in 0..batch {
                    let x = train[cycler.next(&mut data_rng)];
                    let feat = model.discriminator_body.infer(x)?;
                    for (mj, fj) in mean.iter_mut().zip(feat.data()) {
                        *mj += fj / batch as f64;
                    }
                }
                mean
            }
        };
        let residual: Vec<f64> = match_mean.iter().zip(&target).map(|(m, c)| m - c).collect();
        let g_feat = cfg.lambda_feat * residual.iter().map(|r| r * r).sum::<f64>();
        // d(g_feat)/d(feature_b) is identical for every sample in the batch.
        let dfeat_fm: Vec<f64> = residual
            .iter()
            .map(|r| 2.0 * cfg.lambda_feat * r / batch as f64)
            .collect();

        // Pass 2: re-run each sample in training mode and backpropagate
        // both loss terms through the frozen networks into G.
        let mut g_adv = 0.0;
        let scale = 1.0 / batch as f64;
        for z in &zs {
            let v = model.generator_head.forward(z)?;
            let bottleneck = v.reshaped(&BOTTLENECK_SHAPE)?;
            let fake = model.generator_decoder.forward(&bottleneck)?;

            let feat_d = model.discriminator_body.forward(&fake)?;
            let p = model.discriminator_head.forward(&feat_d)?.data()[0];
            let (adv, dp) = log_one_minus(p);
            g_adv += adv * scale;
            let dfeat_adv = model
                .discriminator_head
                .backward(&Tensor::from_vec(&[1], vec![dp * scale])?)?;

            let dx: Vec<f64> = match phi.as_mut() {
                Some(enc) => {
                    let dx_adv = model.discriminator_body.backward(&dfeat_adv)?;
                    enc.forward(&fake)?;
                    let dx_feat =
                        enc.backward(&Tensor::from_vec(&[FEATURE_DIM], dfeat_fm.clone())?)?;
                    dx_adv
                        .data()
                        .iter()
                        .zip(dx_feat.data())
                        .map(|(a, b)| a + b)
                        .collect()
                }
                None => {
                    // Both terms flow through the same discriminator body.
                    let combined: Vec<f64> = dfeat_adv
                        .data()
                        .iter()
                        .zip(&dfeat_fm)
                        .map(|(a, b)| a + b)
                        .collect();
                    model
                        .discriminator_body
                        .backward(&Tensor::from_vec(&[FEATURE_DIM], combined)?)?
                        .into_data()
                }
            };
            let d_bottleneck = model
                .generator_decoder
                .backward(&Tensor::from_vec(fake.shape(), dx)?)?;
            model
                .generator_head
                .backward(&d_bottleneck.reshaped(&[FEATURE_DIM])?)?;
        }
        opt_g_head.step(&mut model.generator_head)?;
        opt_g_dec.step(&mut model.generator_decoder)?;

        curve.push(vec![
            iter as f64,
            d_loss / cfg.d_steps_per_g.max(1) as f64,
            g_adv,
            g_feat,
            gen_mean_svdd,
            pixel_var,
        ])?;
        if iter % cfg.collapse_check_interval.max(1) == 0 && detector.observe(pixel_var) {
            return Err(Error::ModeCollapse(detector.required));
        }
        if iter % 10 == 0 {
            info!("gan iter {iter}: d {d_loss:.4} g_adv {g_adv:.4} g_feat {g_feat:.4} gen_svdd {gen_mean_svdd:.4}");
        }
    }

    model.discriminator_body.set_frozen(false);
    model.discriminator_head.set_frozen(false);
    for net in [
        &mut model.generator_head,
        &mut model.generator_decoder,
        &mut model.discriminator_body,
        &mut model.discriminator_head,
    ] {
        net.clear_caches();
        net.zero_grads();
    }
    Ok((model, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_deterministic_per_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_noise(1.0, &mut a).data(), sample_noise(1.0, &mut b).data());
    }

    #[test]
    fn generation_is_deterministic_given_fixed_weights() {
        let dcae = DcaeModel::fresh(1, 9).unwrap();
        let model = IoGenModel {
            generator_head: build_generator_head(1).unwrap(),
            generator_decoder: dcae.decoder.clone(),
            discriminator_body: build_encoder(1, 2).unwrap(),
            discriminator_head: build_discriminator_head(3).unwrap(),
            sigma: 1.0,
            lambda_feat: 10.0,
            m: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = sample_noise(1.0, &mut rng);
        let a = model.generate(&z).unwrap();
        let b = model.generate(&z).unwrap();
        assert_eq!(a.data(), b.data());
        assert!(a.data().iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }

    #[test]
    fn collapse_detector_requires_consecutive_hits() {
        let mut d = CollapseDetector::new(1e-6, 3);
        assert!(!d.observe(1e-9));
        assert!(!d.observe(1e-9));
        assert!(!d.observe(1.0)); // resets
        assert!(!d.observe(1e-9));
        assert!(!d.observe(1e-9));
        assert!(d.observe(1e-9));
    }
}
