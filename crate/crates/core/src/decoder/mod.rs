//! Untrained deep-decoder generator `G(θ)`.
//!
//! Each hidden layer is a 1×1 convolution, ReLU, channel normalization with
//! learnable per-channel scale and bias, and a fixed bilinear upsampling. The
//! output layer is a 1×1 convolution followed by a sigmoid. Activations are
//! stored pixel-major as `(pixels × channels)` matrices so every 1×1
//! convolution is a single matrix product.
//!
//! Gradients of `g(θ) = ‖G(θ) − target‖²` are computed by a hand-written
//! reverse pass; see [`Decoder::loss_and_grad`].

mod adam;
mod checkpoint;
mod network;
mod upsample;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader};
pub use network::Decoder;

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::ImageGrid;

/// Default channel-normalization guard.
pub const DEFAULT_CN_EPSILON: f64 = 1e-5;
/// Standard deviation of the latent code entries (variance 0.01).
pub const LATENT_STD: f64 = 0.1;

/// Network architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// `[c0, c1, …, cJ]`; J = len − 1 hidden layers.
    pub channels: Vec<usize>,
    pub output_channels: usize,
    pub latent_h: usize,
    pub latent_w: usize,
    pub upsample_factor: usize,
    pub cn_epsilon: f64,
}

impl DecoderConfig {
    /// Geometry producing an `rows×cols` grayscale image: the latent grid is
    /// the image size divided by `factor^J`, which must be exact.
    pub fn for_image(rows: usize, cols: usize, channels: Vec<usize>) -> Result<Self> {
        if channels.len() < 2 {
            return Err(invalid("decoder needs at least one hidden layer (two channel entries)"));
        }
        let factor = 2usize;
        let scale = factor.pow((channels.len() - 1) as u32);
        if !rows.is_multiple_of(scale) || !cols.is_multiple_of(scale) {
            return Err(invalid(format!(
                "image {rows}x{cols} is not divisible by the decoder upsampling {scale}"
            )));
        }
        let cfg = Self {
            channels,
            output_channels: 1,
            latent_h: rows / scale,
            latent_w: cols / scale,
            upsample_factor: factor,
            cn_epsilon: DEFAULT_CN_EPSILON,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.len() < 2 {
            return Err(invalid("decoder needs at least one hidden layer"));
        }
        if self.channels.contains(&0) || self.output_channels == 0 {
            return Err(invalid("channel counts must be positive"));
        }
        if self.latent_h == 0 || self.latent_w == 0 || self.upsample_factor == 0 {
            return Err(invalid("latent dimensions and upsample factor must be positive"));
        }
        if !(self.cn_epsilon > 0.0) {
            return Err(invalid("cn_epsilon must be positive"));
        }
        Ok(())
    }

    /// Number of hidden layers J.
    pub fn depth(&self) -> usize {
        self.channels.len() - 1
    }

    /// Spatial size of the last hidden layer (and of each output plane).
    pub fn plane_dims(&self) -> (usize, usize) {
        let s = self.upsample_factor.pow(self.depth() as u32);
        (self.latent_h * s, self.latent_w * s)
    }

    /// Output image size; channels are stacked vertically as planes.
    pub fn output_dims(&self) -> (usize, usize) {
        let (h, w) = self.plane_dims();
        (h * self.output_channels, w)
    }

    /// `d0 = latent_h · latent_w`.
    pub fn latent_pixels(&self) -> usize {
        self.latent_h * self.latent_w
    }

    pub(crate) fn weight_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes: Vec<_> = self.channels.windows(2).map(|w| (w[0], w[1])).collect();
        shapes.push((*self.channels.last().unwrap(), self.output_channels));
        shapes
    }
}

/// `Σ_j c_j·c_{j+1} + c_J·c_out + Σ_j 2·c_{j+1}`.
pub fn param_count(cfg: &DecoderConfig) -> usize {
    let weights: usize = cfg.weight_shapes().iter().map(|(r, c)| r * c).sum();
    let affine: usize = cfg.channels[1..].iter().map(|c| 2 * c).sum();
    weights + affine
}

/// Fixed latent input `Z0` of shape `d0 × c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentCode {
    values: Array2<f64>,
}

impl LatentCode {
    pub fn new(cfg: &DecoderConfig, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (cfg.latent_pixels(), cfg.channels[0]) {
            return Err(invalid(format!(
                "latent code shape {:?} does not match config ({}, {})",
                values.dim(),
                cfg.latent_pixels(),
                cfg.channels[0]
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }
}

/// Latent entries drawn i.i.d. from N(0, 0.01).
pub fn init_latent(cfg: &DecoderConfig, seed: u64) -> LatentCode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, LATENT_STD).expect("valid normal");
    let (d0, c0) = (cfg.latent_pixels(), cfg.channels[0]);
    let data: Vec<f64> = (0..d0 * c0).map(|_| normal.sample(&mut rng)).collect();
    LatentCode { values: Array2::from_shape_vec((d0, c0), data).expect("shape") }
}

/// Trainable parameters θ, stored flat as `vec(W_0, …, W_J)` followed by the
/// per-layer channel-norm `(scale, bias)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    theta: Vec<f64>,
    weight_shapes: Vec<(usize, usize)>,
    weight_offsets: Vec<usize>,
    cn_offsets: Vec<(usize, usize)>,
}

impl DecoderParams {
    pub fn zeros(cfg: &DecoderConfig) -> Self {
        let weight_shapes = cfg.weight_shapes();
        let mut offset = 0;
        let mut weight_offsets = Vec::with_capacity(weight_shapes.len());
        for (r, c) in &weight_shapes {
            weight_offsets.push(offset);
            offset += r * c;
        }
        let mut cn_offsets = Vec::with_capacity(cfg.depth());
        for &c in &cfg.channels[1..] {
            cn_offsets.push((offset, c));
            offset += 2 * c;
        }
        Self { theta: vec![0.0; offset], weight_shapes, weight_offsets, cn_offsets }
    }

    /// Rebuilds parameters from a flat θ in canonical order.
    pub fn from_flat(cfg: &DecoderConfig, theta: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(cfg);
        if theta.len() != p.theta.len() {
            return Err(invalid(format!(
                "flat parameter vector has length {}, config needs {}",
                theta.len(),
                p.theta.len()
            )));
        }
        p.theta.copy_from_slice(theta);
        Ok(p)
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.theta.clone()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.theta
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn num_weights(&self) -> usize {
        self.weight_shapes.len()
    }

    /// `W_j`, shape `c_j × c_{j+1}` (or `c_J × c_out` for the output layer).
    pub fn weight(&self, j: usize) -> ArrayView2<'_, f64> {
        let (r, c) = self.weight_shapes[j];
        let off = self.weight_offsets[j];
        ArrayView2::from_shape((r, c), &self.theta[off..off + r * c]).expect("weight shape")
    }

    pub fn weight_mut(&mut self, j: usize) -> &mut [f64] {
        let (r, c) = self.weight_shapes[j];
        let off = self.weight_offsets[j];
        &mut self.theta[off..off + r * c]
    }

    pub fn cn_scale(&self, layer: usize) -> &[f64] {
        let (off, c) = self.cn_offsets[layer];
        &self.theta[off..off + c]
    }

    pub fn cn_bias(&self, layer: usize) -> &[f64] {
        let (off, c) = self.cn_offsets[layer];
        &self.theta[off + c..off + 2 * c]
    }

    pub fn cn_scale_mut(&mut self, layer: usize) -> &mut [f64] {
        let (off, c) = self.cn_offsets[layer];
        &mut self.theta[off..off + c]
    }

    pub fn cn_bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let (off, c) = self.cn_offsets[layer];
        &mut self.theta[off + c..off + 2 * c]
    }

    pub(crate) fn weight_offset(&self, j: usize) -> usize {
        self.weight_offsets[j]
    }

    pub(crate) fn cn_offset(&self, layer: usize) -> (usize, usize) {
        self.cn_offsets[layer]
    }
}

/// He initialization: `W_j ~ N(0, 2/c_j)`, scale 1, bias 0.
pub fn init_params(cfg: &DecoderConfig, seed: u64) -> DecoderParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = DecoderParams::zeros(cfg);
    for (j, (fan_in, _)) in cfg.weight_shapes().into_iter().enumerate() {
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("valid normal");
        for w in p.weight_mut(j) {
            *w = normal.sample(&mut rng);
        }
    }
    for layer in 0..cfg.depth() {
        p.cn_scale_mut(layer).fill(1.0);
    }
    p
}

/// Free-function form of [`Decoder::forward`].
pub fn forward(cfg: &DecoderConfig, params: &DecoderParams, latent: &LatentCode) -> Result<ImageGrid> {
    Decoder::new(cfg.clone(), latent.clone())?.forward(params)
}

/// Free-function form of [`Decoder::loss_and_grad`].
pub fn loss_and_grad(
    cfg: &DecoderConfig,
    params: &DecoderParams,
    latent: &LatentCode,
    target: &ImageGrid,
) -> Result<(f64, Vec<f64>)> {
    Decoder::new(cfg.clone(), latent.clone())?.loss_and_grad(params, target)
}

/// Free-function form of [`Decoder::fit`]; returns the updated parameters
/// and optimizer state.
pub fn fit(
    cfg: &DecoderConfig,
    mut params: DecoderParams,
    mut state: AdamState,
    latent: &LatentCode,
    target: &ImageGrid,
    steps: usize,
    lr: f64,
) -> Result<(DecoderParams, AdamState)> {
    Decoder::new(cfg.clone(), latent.clone())?.fit(&mut params, &mut state, target, steps, lr)?;
    Ok((params, state))
}
