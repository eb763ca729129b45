//! The fixed layer set: 2D/1D convolution, dense, pooling, upsampling,
//! flatten and elementwise activations.
//!
//! Convolutions use "same" padding with stride 1; pooling windows must
//! divide the spatial extent exactly. Convolution forward/backward is
//! expressed as im2col plus a dgemm call.

use serde::{Deserialize, Serialize};

use crate::activation::ActivationName;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Architecture descriptor for a single layer. This is the unit that goes
/// over the wire in the binary parameter container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d {
        in_channels: usize,
        kernels: usize,
        kernel_size: usize,
        stride: usize,
        bias: bool,
    },
    Conv1d {
        in_channels: usize,
        kernels: usize,
        kernel_size: usize,
        stride: usize,
        bias: bool,
    },
    Dense {
        in_dim: usize,
        out_dim: usize,
        bias: bool,
    },
    MaxPool2d {
        window: usize,
        stride: usize,
    },
    Upsample2d {
        factor: usize,
    },
    AvgPool1d {
        window: usize,
        stride: usize,
    },
    Flatten,
    Activation {
        name: ActivationName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
}

impl LayerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::MaxPool2d { .. } => "maxpool2d",
            LayerSpec::Upsample2d { .. } => "upsample2d",
            LayerSpec::AvgPool1d { .. } => "avgpool1d",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Activation { .. } => "activation",
        }
    }

    /// Validates the spec's own parameters (shape-independent checks).
    pub fn validate(&self, context: &str) -> Result<()> {
        let fail = |reason: String| Err(Error::config(context, reason));
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                kernels,
                kernel_size,
                stride,
                ..
            }
            | LayerSpec::Conv1d {
                in_channels,
                kernels,
                kernel_size,
                stride,
                ..
            } => {
                if in_channels == 0 || kernels == 0 || kernel_size == 0 {
                    return fail("channel and kernel counts must be positive".into());
                }
                if kernel_size % 2 == 0 {
                    return fail(format!(
                        "kernel size {kernel_size} must be odd for same padding"
                    ));
                }
                if stride != 1 {
                    return fail(format!("convolution stride {stride} unsupported (only 1)"));
                }
                Ok(())
            }
            LayerSpec::Dense { in_dim, out_dim, .. } => {
                if in_dim == 0 || out_dim == 0 {
                    return fail("dense dimensions must be positive".into());
                }
                Ok(())
            }
            LayerSpec::MaxPool2d { window, stride } | LayerSpec::AvgPool1d { window, stride } => {
                if window == 0 {
                    return fail("pool window must be positive".into());
                }
                if window != stride {
                    return fail(format!(
                        "pool window {window} must equal stride {stride} (exact tiling)"
                    ));
                }
                Ok(())
            }
            LayerSpec::Upsample2d { factor } => {
                if factor == 0 {
                    return fail("upsample factor must be positive".into());
                }
                Ok(())
            }
            LayerSpec::Flatten => Ok(()),
            LayerSpec::Activation { name, alpha } => {
                if name == ActivationName::LeakyRelu && alpha.is_none() {
                    return fail("leaky_relu requires alpha".into());
                }
                Ok(())
            }
        }
    }

    /// Output shape for a given input shape, or a configuration error
    /// naming the offending layer.
    pub fn output_shape(&self, input: &[usize], context: &str) -> Result<Vec<usize>> {
        let fail = |reason: String| Err(Error::config(context, reason));
        match *self {
            LayerSpec::Conv2d { in_channels, kernels, .. } => {
                if input.len() != 3 {
                    return fail(format!("conv2d expects [h, w, c] input, got {input:?}"));
                }
                if input[2] != in_channels {
                    return fail(format!(
                        "conv2d expects {in_channels} input channels, got {}",
                        input[2]
                    ));
                }
                Ok(vec![input[0], input[1], kernels])
            }
            LayerSpec::Conv1d { in_channels, kernels, .. } => {
                if input.len() != 2 {
                    return fail(format!("conv1d expects [len, c] input, got {input:?}"));
                }
                if input[1] != in_channels {
                    return fail(format!(
                        "conv1d expects {in_channels} input channels, got {}",
                        input[1]
                    ));
                }
                Ok(vec![input[0], kernels])
            }
            LayerSpec::Dense { in_dim, out_dim, .. } => {
                if input != [in_dim] {
                    return fail(format!("dense expects [{in_dim}] input, got {input:?}"));
                }
                Ok(vec![out_dim])
            }
            LayerSpec::MaxPool2d { window, .. } => {
                if input.len() != 3 {
                    return fail(format!("maxpool2d expects [h, w, c] input, got {input:?}"));
                }
                if input[0] % window != 0 || input[1] % window != 0 {
                    return fail(format!(
                        "maxpool2d window {window} must divide spatial dims {}x{}",
                        input[0], input[1]
                    ));
                }
                Ok(vec![input[0] / window, input[1] / window, input[2]])
            }
            LayerSpec::Upsample2d { factor } => {
                if input.len() != 3 {
                    return fail(format!("upsample2d expects [h, w, c] input, got {input:?}"));
                }
                Ok(vec![input[0] * factor, input[1] * factor, input[2]])
            }
            LayerSpec::AvgPool1d { window, .. } => {
                if input.len() != 2 {
                    return fail(format!("avgpool1d expects [len, c] input, got {input:?}"));
                }
                if input[0] % window != 0 {
                    return fail(format!(
                        "avgpool1d window {window} must divide length {}",
                        input[0]
                    ));
                }
                Ok(vec![input[0] / window, input[1]])
            }
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
            LayerSpec::Activation { .. } => Ok(input.to_vec()),
        }
    }

    /// Number of weight elements, or 0 for parameter-free layers.
    pub fn weight_len(&self) -> usize {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                kernels,
                kernel_size,
                ..
            } => kernel_size * kernel_size * in_channels * kernels,
            LayerSpec::Conv1d {
                in_channels,
                kernels,
                kernel_size,
                ..
            } => kernel_size * in_channels * kernels,
            LayerSpec::Dense { in_dim, out_dim, .. } => in_dim * out_dim,
            _ => 0,
        }
    }

    pub fn bias_len(&self) -> usize {
        match *self {
            LayerSpec::Conv2d { kernels, bias: true, .. } => kernels,
            LayerSpec::Conv1d { kernels, bias: true, .. } => kernels,
            LayerSpec::Dense { out_dim, bias: true, .. } => out_dim,
            _ => 0,
        }
    }

    /// Fan-in / fan-out used by the weight initializers.
    pub fn fans(&self) -> Option<(usize, usize)> {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                kernels,
                kernel_size,
                ..
            } => Some((
                kernel_size * kernel_size * in_channels,
                kernel_size * kernel_size * kernels,
            )),
            LayerSpec::Conv1d {
                in_channels,
                kernels,
                kernel_size,
                ..
            } => Some((kernel_size * in_channels, kernel_size * kernels)),
            LayerSpec::Dense { in_dim, out_dim, .. } => Some((in_dim, out_dim)),
            _ => None,
        }
    }
}

/// A layer instance: spec plus parameters and the forward cache needed
/// for backpropagation.
#[derive(Debug, Clone)]
pub struct Layer {
    pub(crate) spec: LayerSpec,
    pub(crate) weights: Option<Tensor>,
    pub(crate) bias: Option<Tensor>,
    cached_input: Option<Tensor>,
    cached_argmax: Option<Vec<u32>>,
}

impl Layer {
    pub fn new(spec: LayerSpec, weights: Option<Tensor>, bias: Option<Tensor>) -> Layer {
        Layer {
            spec,
            weights,
            bias,
            cached_input: None,
            cached_argmax: None,
        }
    }

    pub fn spec(&self) -> &LayerSpec {
        &self.spec
    }

    pub fn weights(&self) -> Option<&Tensor> {
        self.weights.as_ref()
    }

    pub fn bias(&self) -> Option<&Tensor> {
        self.bias.as_ref()
    }

    pub fn clear_cache(&mut self) {
        self.cached_input = None;
        self.cached_argmax = None;
    }

    /// Forward pass that records the inputs needed by `backward`.
    pub fn forward(&mut self, input: &Tensor, context: &str) -> Result<Tensor> {
        let (out, argmax) = self.eval(input, context)?;
        self.cached_input = Some(input.clone());
        self.cached_argmax = argmax;
        Ok(out)
    }

    /// Pure forward pass for inference; leaves the training cache alone.
    pub fn infer(&self, input: &Tensor, context: &str) -> Result<Tensor> {
        Ok(self.eval(input, context)?.0)
    }

    fn eval(&self, input: &Tensor, context: &str) -> Result<(Tensor, Option<Vec<u32>>)> {
        let out_shape = self.spec.output_shape(input.shape(), context)?;
        match &self.spec {
            LayerSpec::Conv2d { in_channels, kernels, kernel_size, .. } => {
                let (h, w) = (input.shape()[0], input.shape()[1]);
                let out = conv_forward(
                    input.data(),
                    &[h, w],
                    *in_channels,
                    *kernels,
                    *kernel_size,
                    self.weights.as_ref().unwrap().data(),
                    self.bias.as_ref().map(|b| b.data()),
                );
                Ok((Tensor::from_vec(&out_shape, out)?, None))
            }
            LayerSpec::Conv1d { in_channels, kernels, kernel_size, .. } => {
                let len = input.shape()[0];
                let out = conv_forward(
                    input.data(),
                    &[len],
                    *in_channels,
                    *kernels,
                    *kernel_size,
                    self.weights.as_ref().unwrap().data(),
                    self.bias.as_ref().map(|b| b.data()),
                );
                Ok((Tensor::from_vec(&out_shape, out)?, None))
            }
            LayerSpec::Dense { in_dim, out_dim, .. } => {
                let w = self.weights.as_ref().unwrap().data();
                let x = input.data();
                let mut y = vec![0.0; *out_dim];
                if let Some(b) = self.bias.as_ref() {
                    y.copy_from_slice(b.data());
                }
                for i in 0..*in_dim {
                    let xi = x[i];
                    let row = &w[i * out_dim..(i + 1) * out_dim];
                    for (yj, wj) in y.iter_mut().zip(row) {
                        *yj = wj.mul_add(xi, *yj);
                    }
                }
                Ok((Tensor::from_vec(&out_shape, y)?, None))
            }
            LayerSpec::MaxPool2d { window, .. } => {
                let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
                let (oh, ow) = (h / window, w / window);
                let mut out = vec![0.0; oh * ow * c];
                let mut argmax = vec![0u32; oh * ow * c];
                let x = input.data();
                for oy in 0..oh {
                    for ox in 0..ow {
                        for ch in 0..c {
                            let mut best = f64::NEG_INFINITY;
                            let mut best_idx = 0usize;
                            for dy in 0..*window {
                                for dx in 0..*window {
                                    let iy = oy * window + dy;
                                    let ix = ox * window + dx;
                                    let idx = (iy * w + ix) * c + ch;
                                    if x[idx] > best {
                                        best = x[idx];
                                        best_idx = idx;
                                    }
                                }
                            }
                            let o = (oy * ow + ox) * c + ch;
                            out[o] = best;
                            argmax[o] = best_idx as u32;
                        }
                    }
                }
                Ok((Tensor::from_vec(&out_shape, out)?, Some(argmax)))
            }
            LayerSpec::Upsample2d { factor } => {
                let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
                let ow = w * factor;
                let mut out = vec![0.0; h * factor * ow * c];
                let x = input.data();
                for iy in 0..h {
                    for ix in 0..w {
                        let src = &x[(iy * w + ix) * c..(iy * w + ix + 1) * c];
                        for dy in 0..*factor {
                            for dx in 0..*factor {
                                let oy = iy * factor + dy;
                                let ox = ix * factor + dx;
                                out[(oy * ow + ox) * c..(oy * ow + ox + 1) * c]
                                    .copy_from_slice(src);
                            }
                        }
                    }
                }
                Ok((Tensor::from_vec(&out_shape, out)?, None))
            }
            LayerSpec::AvgPool1d { window, .. } => {
                let (len, c) = (input.shape()[0], input.shape()[1]);
                let ol = len / window;
                let mut out = vec![0.0; ol * c];
                let x = input.data();
                let inv = 1.0 / *window as f64;
                for o in 0..ol {
                    for ch in 0..c {
                        let mut acc = 0.0;
                        for d in 0..*window {
                            acc += x[((o * window + d) * c) + ch];
                        }
                        out[o * c + ch] = acc * inv;
                    }
                }
                Ok((Tensor::from_vec(&out_shape, out)?, None))
            }
            LayerSpec::Flatten => Ok((input.reshaped(&out_shape)?, None)),
            LayerSpec::Activation { name, alpha } => {
                let a = alpha.unwrap_or(0.0);
                let out: Vec<f64> = input.data().iter().map(|&v| name.apply(v, a)).collect();
                Ok((Tensor::from_vec(&out_shape, out)?, None))
            }
        }
    }

    /// Backward pass. Accumulates parameter gradients (unless `frozen`)
    /// and returns the gradient with respect to the layer input.
    pub fn backward(&mut self, grad_out: &Tensor, frozen: bool, context: &str) -> Result<Tensor> {
        let input = self
            .cached_input
            .take()
            .ok_or_else(|| Error::State(format!("backward before forward in {context}")))?;
        let expected = self.spec.output_shape(input.shape(), context)?;
        if grad_out.shape() != expected.as_slice() {
            return Err(Error::shape(context, &expected, grad_out.shape()));
        }

        let grad_in = match &self.spec {
            LayerSpec::Conv2d { in_channels, kernels, kernel_size, .. } => {
                let (h, w) = (input.shape()[0], input.shape()[1]);
                let (din, dw, db) = conv_backward(
                    input.data(),
                    &[h, w],
                    *in_channels,
                    *kernels,
                    *kernel_size,
                    self.weights.as_ref().unwrap().data(),
                    grad_out.data(),
                    !frozen,
                );
                if !frozen {
                    accumulate(self.weights.as_mut().unwrap().grad_mut(), &dw);
                    if let Some(b) = self.bias.as_mut() {
                        accumulate(b.grad_mut(), &db);
                    }
                }
                Tensor::from_vec(input.shape(), din)?
            }
            LayerSpec::Conv1d { in_channels, kernels, kernel_size, .. } => {
                let len = input.shape()[0];
                let (din, dw, db) = conv_backward(
                    input.data(),
                    &[len],
                    *in_channels,
                    *kernels,
                    *kernel_size,
                    self.weights.as_ref().unwrap().data(),
                    grad_out.data(),
                    !frozen,
                );
                if !frozen {
                    accumulate(self.weights.as_mut().unwrap().grad_mut(), &dw);
                    if let Some(b) = self.bias.as_mut() {
                        accumulate(b.grad_mut(), &db);
                    }
                }
                Tensor::from_vec(input.shape(), din)?
            }
            LayerSpec::Dense { in_dim, out_dim, .. } => {
                let dy = grad_out.data();
                let x = input.data();
                let w = self.weights.as_ref().unwrap().data();
                let mut dx = vec![0.0; *in_dim];
                for i in 0..*in_dim {
                    let row = &w[i * out_dim..(i + 1) * out_dim];
                    let mut acc = 0.0;
                    for (wj, gj) in row.iter().zip(dy) {
                        acc = wj.mul_add(*gj, acc);
                    }
                    dx[i] = acc;
                }
                if !frozen {
                    {
                        let gw = self.weights.as_mut().unwrap().grad_mut();
                        for i in 0..*in_dim {
                            let xi = x[i];
                            let row = &mut gw[i * out_dim..(i + 1) * out_dim];
                            for (gj, dyj) in row.iter_mut().zip(dy) {
                                *gj = dyj.mul_add(xi, *gj);
                            }
                        }
                    }
                    if let Some(b) = self.bias.as_mut() {
                        accumulate(b.grad_mut(), dy);
                    }
                }
                Tensor::from_vec(input.shape(), dx)?
            }
            LayerSpec::MaxPool2d { .. } => {
                let argmax = self
                    .cached_argmax
                    .take()
                    .ok_or_else(|| Error::State(format!("missing pool cache in {context}")))?;
                let mut din = vec![0.0; input.numel()];
                for (o, &src) in argmax.iter().enumerate() {
                    din[src as usize] += grad_out.data()[o];
                }
                Tensor::from_vec(input.shape(), din)?
            }
            LayerSpec::Upsample2d { factor } => {
                let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
                let ow = w * factor;
                let dy = grad_out.data();
                let mut din = vec![0.0; input.numel()];
                for iy in 0..h {
                    for ix in 0..w {
                        for ch in 0..c {
                            let mut acc = 0.0;
                            for fy in 0..*factor {
                                for fx in 0..*factor {
                                    let oy = iy * factor + fy;
                                    let ox = ix * factor + fx;
                                    acc += dy[(oy * ow + ox) * c + ch];
                                }
                            }
                            din[(iy * w + ix) * c + ch] = acc;
                        }
                    }
                }
                Tensor::from_vec(input.shape(), din)?
            }
            LayerSpec::AvgPool1d { window, .. } => {
                let (len, c) = (input.shape()[0], input.shape()[1]);
                let ol = len / window;
                let dy = grad_out.data();
                let inv = 1.0 / *window as f64;
                let mut din = vec![0.0; input.numel()];
                for o in 0..ol {
                    for ch in 0..c {
                        let g = dy[o * c + ch] * inv;
                        for d in 0..*window {
                            din[(o * window + d) * c + ch] = g;
                        }
                    }
                }
                Tensor::from_vec(input.shape(), din)?
            }
            LayerSpec::Flatten => Tensor::from_vec(input.shape(), grad_out.data().to_vec())?,
            LayerSpec::Activation { name, alpha } => {
                let a = alpha.unwrap_or(0.0);
                let din: Vec<f64> = input
                    .data()
                    .iter()
                    .zip(grad_out.data())
                    .map(|(&x, &g)| g * name.derivative(x, a))
                    .collect();
                Tensor::from_vec(input.shape(), din)?
            }
        };
        Ok(grad_in)
    }
}

fn accumulate(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Gathers same-padded convolution patches; rows are output positions,
/// columns are `[offsets.., channel]` in kernel order.
fn im2col(
    input: &[f64],
    spatial: &[usize],
    channels: usize,
    kernel: usize,
    patches: &mut Vec<f64>,
) -> usize {
    let pad = (kernel - 1) / 2;
    match spatial {
        [h, w] => {
            let (h, w) = (*h, *w);
            let k2 = kernel * kernel;
            let cols = k2 * channels;
            patches.clear();
            patches.resize(h * w * cols, 0.0);
            for oy in 0..h {
                for ox in 0..w {
                    let row = (oy * w + ox) * cols;
                    for ky in 0..kernel {
                        let iy = oy as isize + ky as isize - pad as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..kernel {
                            let ix = ox as isize + kx as isize - pad as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let src = ((iy as usize) * w + ix as usize) * channels;
                            let dst = row + (ky * kernel + kx) * channels;
                            patches[dst..dst + channels]
                                .copy_from_slice(&input[src..src + channels]);
                        }
                    }
                }
            }
            cols
        }
        [len] => {
            let len = *len;
            let cols = kernel * channels;
            patches.clear();
            patches.resize(len * cols, 0.0);
            for o in 0..len {
                let row = o * cols;
                for k in 0..kernel {
                    let i = o as isize + k as isize - pad as isize;
                    if i < 0 || i >= len as isize {
                        continue;
                    }
                    let src = (i as usize) * channels;
                    patches[row + k * channels..row + (k + 1) * channels]
                        .copy_from_slice(&input[src..src + channels]);
                }
            }
            cols
        }
        _ => unreachable!("conv spatial rank"),
    }
}

/// Scatters patch-space gradients back to input positions (transpose of
/// `im2col`).
fn col2im(
    dpatches: &[f64],
    spatial: &[usize],
    channels: usize,
    kernel: usize,
    din: &mut [f64],
) {
    let pad = (kernel - 1) / 2;
    match spatial {
        [h, w] => {
            let (h, w) = (*h, *w);
            let cols = kernel * kernel * channels;
            for oy in 0..h {
                for ox in 0..w {
                    let row = (oy * w + ox) * cols;
                    for ky in 0..kernel {
                        let iy = oy as isize + ky as isize - pad as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..kernel {
                            let ix = ox as isize + kx as isize - pad as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let dst = ((iy as usize) * w + ix as usize) * channels;
                            let src = row + (ky * kernel + kx) * channels;
                            for c in 0..channels {
                                din[dst + c] += dpatches[src + c];
                            }
                        }
                    }
                }
            }
        }
        [len] => {
            let len = *len;
            let cols = kernel * channels;
            for o in 0..len {
                let row = o * cols;
                for k in 0..kernel {
                    let i = o as isize + k as isize - pad as isize;
                    if i < 0 || i >= len as isize {
                        continue;
                    }
                    let dst = (i as usize) * channels;
                    let src = row + k * channels;
                    for c in 0..channels {
                        din[dst + c] += dpatches[src + c];
                    }
                }
            }
        }
        _ => unreachable!("conv spatial rank"),
    }
}

/// y = patches(x) . W (+ bias), with W laid out `[offsets.., cin, cout]`
/// row-major, i.e. shape `[k^d * cin, cout]`.
fn conv_forward(
    input: &[f64],
    spatial: &[usize],
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    weights: &[f64],
    bias: Option<&[f64]>,
) -> Vec<f64> {
    let positions: usize = spatial.iter().product();
    let mut patches = Vec::new();
    let cols = im2col(input, spatial, in_channels, kernel, &mut patches);
    let mut out = vec![0.0; positions * out_channels];
    unsafe {
        matrixmultiply::dgemm(
            positions,
            cols,
            out_channels,
            1.0,
            patches.as_ptr(),
            cols as isize,
            1,
            weights.as_ptr(),
            out_channels as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            out_channels as isize,
            1,
        );
    }
    if let Some(b) = bias {
        for row in out.chunks_exact_mut(out_channels) {
            for (o, bv) in row.iter_mut().zip(b) {
                *o += bv;
            }
        }
    }
    out
}

/// Returns (d_input, d_weights, d_bias). Weight/bias gradients are empty
/// when `want_param_grads` is false.
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    input: &[f64],
    spatial: &[usize],
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    weights: &[f64],
    grad_out: &[f64],
    want_param_grads: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let positions: usize = spatial.iter().product();
    let mut patches = Vec::new();
    let cols = im2col(input, spatial, in_channels, kernel, &mut patches);

    // d_patches = grad_out . W^T
    let mut dpatches = vec![0.0; positions * cols];
    unsafe {
        matrixmultiply::dgemm(
            positions,
            out_channels,
            cols,
            1.0,
            grad_out.as_ptr(),
            out_channels as isize,
            1,
            weights.as_ptr(),
            1,
            out_channels as isize,
            0.0,
            dpatches.as_mut_ptr(),
            cols as isize,
            1,
        );
    }
    let mut din = vec![0.0; positions * in_channels];
    col2im(&dpatches, spatial, in_channels, kernel, &mut din);

    let mut dw = Vec::new();
    let mut db = Vec::new();
    if want_param_grads {
        // d_W = patches^T . grad_out
        dw.resize(cols * out_channels, 0.0);
        unsafe {
            matrixmultiply::dgemm(
                cols,
                positions,
                out_channels,
                1.0,
                patches.as_ptr(),
                1,
                cols as isize,
                grad_out.as_ptr(),
                out_channels as isize,
                1,
                0.0,
                dw.as_mut_ptr(),
                out_channels as isize,
                1,
            );
        }
        db.resize(out_channels, 0.0);
        for row in grad_out.chunks_exact(out_channels) {
            for (d, g) in db.iter_mut().zip(row) {
                *d += g;
            }
        }
    }
    (din, dw, db)
}
