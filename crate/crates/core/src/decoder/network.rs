use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::upsample::Upsampler;
use super::{DecoderConfig, DecoderParams, LatentCode};
use crate::error::{check_dims, invalid, Result};
use crate::grid::ImageGrid;

/// A configured generator with its fixed latent code.
#[derive(Debug, Clone)]
pub struct Decoder {
    cfg: DecoderConfig,
    latent: LatentCode,
    upsamplers: Vec<Upsampler>,
    parallel: bool,
}

struct HiddenCache {
    input: Vec<f64>,
    pre_activation: Vec<f64>,
    normalized: Vec<f64>,
    inv_std: Vec<f64>,
}

struct ForwardCache {
    hidden: Vec<HiddenCache>,
    last: Vec<f64>,
    output: Vec<f64>,
}

/// `dot` may return a column-major array (e.g. when an operand has one
/// column), so the buffer is read in logical order unless already standard.
fn into_row_major(m: Array2<f64>) -> Vec<f64> {
    if m.is_standard_layout() {
        m.into_raw_vec_and_offset().0
    } else {
        m.iter().copied().collect()
    }
}

/// Row blocks handed to the pool when parallel kernels are enabled.
const PAR_ROWS: usize = 256;

fn matmul(a: &[f64], rows: usize, inner: usize, b: ArrayView2<'_, f64>, par: bool) -> Vec<f64> {
    if par && rows > PAR_ROWS {
        let n = b.ncols();
        let mut out = vec![0.0; rows * n];
        out.par_chunks_mut(PAR_ROWS * n)
            .zip(a.par_chunks(PAR_ROWS * inner))
            .for_each(|(o, blk)| o.copy_from_slice(&matmul(blk, blk.len() / inner, inner, b, false)));
        return out;
    }
    let a = ArrayView2::from_shape((rows, inner), a).expect("matmul lhs shape");
    into_row_major(a.dot(&b))
}

/// `aᵀ·b` for `a: rows×ca`, `b: rows×cb`. The parallel path sums per-block
/// partial products, so it is not bit-identical to the serial one.
fn matmul_tn(a: &[f64], b: &[f64], rows: usize, ca: usize, cb: usize, par: bool) -> Vec<f64> {
    if par && rows > PAR_ROWS {
        let partials: Vec<Vec<f64>> = a
            .par_chunks(PAR_ROWS * ca)
            .zip(b.par_chunks(PAR_ROWS * cb))
            .map(|(x, y)| matmul_tn(x, y, x.len() / ca, ca, cb, false))
            .collect();
        let mut out = vec![0.0; ca * cb];
        for p in partials {
            out.iter_mut().zip(p).for_each(|(o, v)| *o += v);
        }
        return out;
    }
    let a = ArrayView2::from_shape((rows, ca), a).expect("lhs shape");
    let b = ArrayView2::from_shape((rows, cb), b).expect("rhs shape");
    into_row_major(a.t().dot(&b))
}

/// `a·wᵀ` for `a: rows×cb`, `w: ca×cb`.
fn matmul_nt(a: &[f64], rows: usize, w: ArrayView2<'_, f64>, par: bool) -> Vec<f64> {
    let (ca, cb) = w.dim();
    if par && rows > PAR_ROWS {
        let mut out = vec![0.0; rows * ca];
        out.par_chunks_mut(PAR_ROWS * ca)
            .zip(a.par_chunks(PAR_ROWS * cb))
            .for_each(|(o, blk)| o.copy_from_slice(&matmul_nt(blk, blk.len() / cb, w, false)));
        return out;
    }
    let a = ArrayView2::from_shape((rows, cb), a).expect("lhs shape");
    into_row_major(a.dot(&w.t()))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Decoder {
    pub fn new(cfg: DecoderConfig, latent: LatentCode) -> Result<Self> {
        cfg.validate()?;
        if latent.values().dim() != (cfg.latent_pixels(), cfg.channels[0]) {
            return Err(invalid("latent code does not match decoder config"));
        }
        let mut upsamplers = Vec::with_capacity(cfg.depth());
        let (mut h, mut w) = (cfg.latent_h, cfg.latent_w);
        for _ in 0..cfg.depth() {
            let up = Upsampler::new(h, w, cfg.upsample_factor);
            (h, w) = up.out_dims();
            upsamplers.push(up);
        }
        Ok(Self { cfg, latent, upsamplers, parallel: false })
    }

    /// Splits the large matrix products over the current rayon pool. The
    /// weight gradients then differ from the serial ones in the last bits.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn latent(&self) -> &LatentCode {
        &self.latent
    }

    fn check_params(&self, params: &DecoderParams) -> Result<()> {
        let expected = super::param_count(&self.cfg);
        if params.len() != expected || params.num_weights() != self.cfg.depth() + 1 {
            return Err(invalid(format!(
                "parameter vector has length {}, config needs {expected}",
                params.len()
            )));
        }
        Ok(())
    }

    fn run(&self, params: &DecoderParams) -> ForwardCache {
        let cfg = &self.cfg;
        let eps = cfg.cn_epsilon;
        let mut z = self.latent.values().iter().copied().collect::<Vec<f64>>();
        let mut pixels = cfg.latent_pixels();
        let mut hidden = Vec::with_capacity(cfg.depth());
        for (j, up) in self.upsamplers.iter().enumerate() {
            let (c_in, c) = (cfg.channels[j], cfg.channels[j + 1]);
            let a = matmul(&z, pixels, c_in, params.weight(j), self.parallel);
            let mut mean = vec![0.0; c];
            for row in a.chunks_exact(c) {
                for (m, &v) in mean.iter_mut().zip(row) {
                    *m += v.max(0.0);
                }
            }
            mean.iter_mut().for_each(|m| *m /= pixels as f64);
            let mut var = vec![0.0; c];
            for row in a.chunks_exact(c) {
                for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                    let d = v.max(0.0) - m;
                    *s += d * d;
                }
            }
            let inv_std: Vec<f64> = var.iter().map(|s| 1.0 / (s / pixels as f64 + eps).sqrt()).collect();
            let (scale, bias) = (params.cn_scale(j), params.cn_bias(j));
            let mut normalized = vec![0.0; a.len()];
            let mut out = vec![0.0; a.len()];
            for ((arow, nrow), orow) in
                a.chunks_exact(c).zip(normalized.chunks_exact_mut(c)).zip(out.chunks_exact_mut(c))
            {
                for k in 0..c {
                    let xh = (arow[k].max(0.0) - mean[k]) * inv_std[k];
                    nrow[k] = xh;
                    orow[k] = xh * scale[k] + bias[k];
                }
            }
            let next = up.forward(&out, c);
            pixels = next.len() / c;
            hidden.push(HiddenCache { input: z, pre_activation: a, normalized, inv_std });
            z = next;
        }
        let j_out = cfg.depth();
        let logits = matmul(&z, pixels, cfg.channels[j_out], params.weight(j_out), self.parallel);
        let output = logits.into_iter().map(sigmoid).collect();
        ForwardCache { hidden, last: z, output }
    }

    /// Converts the `(pixels × c_out)` output into an image with channel
    /// planes stacked vertically.
    fn to_image(&self, output: &[f64]) -> ImageGrid {
        let (rows, cols) = self.cfg.output_dims();
        let c_out = self.cfg.output_channels;
        let plane = output.len() / c_out;
        let mut data = vec![0.0; output.len()];
        for (p, row) in output.chunks_exact(c_out).enumerate() {
            for (ch, &v) in row.iter().enumerate() {
                data[ch * plane + p] = v;
            }
        }
        ImageGrid::from_raw(rows, cols, data)
    }

    /// `G(θ)`; every entry lies in (0, 1).
    pub fn forward(&self, params: &DecoderParams) -> Result<ImageGrid> {
        self.check_params(params)?;
        Ok(self.to_image(&self.run(params).output))
    }

    /// `g(θ) = ‖G(θ) − target‖²` and `∂g/∂θ` in flat θ order.
    pub fn loss_and_grad(&self, params: &DecoderParams, target: &ImageGrid) -> Result<(f64, Vec<f64>)> {
        self.check_params(params)?;
        check_dims("decoder target", self.cfg.output_dims(), target.dims())?;
        let cfg = &self.cfg;
        let cache = self.run(params);
        let c_out = cfg.output_channels;
        let plane = cache.output.len() / c_out;
        let t = target.as_slice();

        let mut loss = 0.0;
        let mut d_logits = vec![0.0; cache.output.len()];
        for (idx, (&g, d)) in cache.output.iter().zip(d_logits.iter_mut()).enumerate() {
            let (p, ch) = (idx / c_out, idx % c_out);
            let r = g - t[ch * plane + p];
            loss += r * r;
            *d = 2.0 * r * g * (1.0 - g);
        }

        let mut grad = vec![0.0; params.len()];
        let j_out = cfg.depth();
        let c_last = cfg.channels[j_out];
        let pixels = cache.last.len() / c_last;
        let gw = matmul_tn(&cache.last, &d_logits, pixels, c_last, c_out, self.parallel);
        let off = params.weight_offset(j_out);
        grad[off..off + gw.len()].copy_from_slice(&gw);
        let mut dz = matmul_nt(&d_logits, pixels, params.weight(j_out), self.parallel);

        for j in (0..cfg.depth()).rev() {
            let layer = &cache.hidden[j];
            let (c_in, c) = (cfg.channels[j], cfg.channels[j + 1]);
            let dn = self.upsamplers[j].backward(&dz, c);
            let n_pix = dn.len() / c;
            let scale = params.cn_scale(j);

            let mut d_scale = vec![0.0; c];
            let mut d_bias = vec![0.0; c];
            let mut mean_dxh = vec![0.0; c];
            let mut mean_dxh_xh = vec![0.0; c];
            for (drow, xrow) in dn.chunks_exact(c).zip(layer.normalized.chunks_exact(c)) {
                for k in 0..c {
                    d_scale[k] += drow[k] * xrow[k];
                    d_bias[k] += drow[k];
                    let dxh = drow[k] * scale[k];
                    mean_dxh[k] += dxh;
                    mean_dxh_xh[k] += dxh * xrow[k];
                }
            }
            let inv_n = 1.0 / n_pix as f64;
            mean_dxh.iter_mut().for_each(|v| *v *= inv_n);
            mean_dxh_xh.iter_mut().for_each(|v| *v *= inv_n);

            let mut da = vec![0.0; dn.len()];
            for (((darow, drow), xrow), arow) in da
                .chunks_exact_mut(c)
                .zip(dn.chunks_exact(c))
                .zip(layer.normalized.chunks_exact(c))
                .zip(layer.pre_activation.chunks_exact(c))
            {
                for k in 0..c {
                    if arow[k] > 0.0 {
                        let dxh = drow[k] * scale[k];
                        darow[k] = layer.inv_std[k] * (dxh - mean_dxh[k] - xrow[k] * mean_dxh_xh[k]);
                    }
                }
            }

            let (cn_off, _) = params.cn_offset(j);
            grad[cn_off..cn_off + c].copy_from_slice(&d_scale);
            grad[cn_off + c..cn_off + 2 * c].copy_from_slice(&d_bias);
            let gw = matmul_tn(&layer.input, &da, n_pix, c_in, c, self.parallel);
            let off = params.weight_offset(j);
            grad[off..off + gw.len()].copy_from_slice(&gw);
            if j > 0 {
                dz = matmul_nt(&da, n_pix, params.weight(j), self.parallel);
            }
        }
        Ok((loss, grad))
    }

    /// Runs `steps` Adam iterations on `g(θ)` at a fixed learning rate,
    /// warm-starting from `params` and `state`. Returns the loss observed
    /// before each step.
    pub fn fit(
        &self,
        params: &mut DecoderParams,
        state: &mut AdamState,
        target: &ImageGrid,
        steps: usize,
        lr: f64,
    ) -> Result<Vec<f64>> {
        let mut losses = Vec::with_capacity(steps);
        for _ in 0..steps {
            let (loss, grad) = self.loss_and_grad(params, target)?;
            adam_step(params, &grad, state, lr)?;
            losses.push(loss);
        }
        Ok(losses)
    }
}
