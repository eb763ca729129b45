//! Affine normalization of stacked flow frames into [-1, 1] tensors.

use ndcompute::Tensor;

use crate::error::{Error, Result};
use crate::frame::{FlowFrame, GRID, GRID_LEN};
use crate::manifest::NormConstants;

fn affine(v: f64, min: f64, max: f64) -> f64 {
    let t = (v.clamp(min, max) - min) / (max - min);
    2.0 * t - 1.0
}

/// Stacks m frames into a `[64, 64, 2m]` tensor, channel pair (h, v) per
/// frame, each channel kind mapped from [min, max] to [-1, 1]. Values
/// outside the constants' range are clamped.
pub fn normalize_stack(frames: &[FlowFrame], constants: &NormConstants) -> Result<Tensor> {
    if constants.h_max <= constants.h_min {
        return Err(Error::DegenerateRange(constants.h_min));
    }
    if constants.v_max <= constants.v_min {
        return Err(Error::DegenerateRange(constants.v_min));
    }
    let m = frames.len();
    let channels = 2 * m;
    let mut data = vec![0.0; GRID_LEN * channels];
    for (fi, frame) in frames.iter().enumerate() {
        for p in 0..GRID_LEN {
            let base = p * channels + 2 * fi;
            data[base] = affine(frame.horizontal[p], constants.h_min, constants.h_max);
            data[base + 1] = affine(frame.vertical[p], constants.v_min, constants.v_max);
        }
    }
    Ok(Tensor::from_vec(&[GRID, GRID, channels], data)?)
}

/// Inverse of `normalize_stack` for in-range values; returns (h, v) grid
/// pairs per frame.
pub fn denormalize_stack(tensor: &Tensor, constants: &NormConstants) -> Vec<(Vec<f64>, Vec<f64>)> {
    let channels = tensor.shape()[2];
    let m = channels / 2;
    let data = tensor.data();
    let mut out = Vec::with_capacity(m);
    for fi in 0..m {
        let mut h = vec![0.0; GRID_LEN];
        let mut v = vec![0.0; GRID_LEN];
        for p in 0..GRID_LEN {
            let base = p * channels + 2 * fi;
            h[p] = (data[base] + 1.0) / 2.0 * (constants.h_max - constants.h_min) + constants.h_min;
            v[p] = (data[base + 1] + 1.0) / 2.0 * (constants.v_max - constants.v_min)
                + constants.v_min;
        }
        out.push((h, v));
    }
    out
}
