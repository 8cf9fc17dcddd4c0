//! Fixed bilinear upsampling (half-pixel centers, edge clamped) on
//! pixel-major `(pixels × channels)` buffers.

#[derive(Debug, Clone, Copy, PartialEq)]
struct Tap {
    lo: usize,
    hi: usize,
    w_lo: f64,
    w_hi: f64,
}

fn taps(len: usize, factor: usize) -> Vec<Tap> {
    (0..len * factor)
        .map(|o| {
            let src = ((o as f64 + 0.5) / factor as f64 - 0.5).max(0.0);
            let lo = (src.floor() as usize).min(len - 1);
            let hi = (lo + 1).min(len - 1);
            let frac = src - lo as f64;
            Tap { lo, hi, w_lo: 1.0 - frac, w_hi: frac }
        })
        .collect()
}

/// Separable bilinear upsampler from `h×w` to `(h·f)×(w·f)`.
#[derive(Debug, Clone)]
pub(crate) struct Upsampler {
    h: usize,
    w: usize,
    factor: usize,
    rows: Vec<Tap>,
    cols: Vec<Tap>,
}

impl Upsampler {
    pub(crate) fn new(h: usize, w: usize, factor: usize) -> Self {
        Self { h, w, factor, rows: taps(h, factor), cols: taps(w, factor) }
    }

    pub(crate) fn out_dims(&self) -> (usize, usize) {
        (self.h * self.factor, self.w * self.factor)
    }

    /// `input` is `(h·w) × c` row-major; returns `(H·W) × c`.
    pub(crate) fn forward(&self, input: &[f64], c: usize) -> Vec<f64> {
        let (oh, ow) = self.out_dims();
        debug_assert_eq!(input.len(), self.h * self.w * c);
        // along x
        let mut tmp = vec![0.0; self.h * ow * c];
        for y in 0..self.h {
            for (ox, t) in self.cols.iter().enumerate() {
                let dst = &mut tmp[(y * ow + ox) * c..(y * ow + ox + 1) * c];
                let a = &input[(y * self.w + t.lo) * c..(y * self.w + t.lo + 1) * c];
                let b = &input[(y * self.w + t.hi) * c..(y * self.w + t.hi + 1) * c];
                for ((d, &va), &vb) in dst.iter_mut().zip(a).zip(b) {
                    *d = t.w_lo * va + t.w_hi * vb;
                }
            }
        }
        // along y
        let mut out = vec![0.0; oh * ow * c];
        let row_len = ow * c;
        for (oy, t) in self.rows.iter().enumerate() {
            let dst = &mut out[oy * row_len..(oy + 1) * row_len];
            let a = &tmp[t.lo * row_len..(t.lo + 1) * row_len];
            let b = &tmp[t.hi * row_len..(t.hi + 1) * row_len];
            for ((d, &va), &vb) in dst.iter_mut().zip(a).zip(b) {
                *d = t.w_lo * va + t.w_hi * vb;
            }
        }
        out
    }

    /// Adjoint of [`forward`](Self::forward).
    pub(crate) fn backward(&self, grad_out: &[f64], c: usize) -> Vec<f64> {
        let (oh, ow) = self.out_dims();
        debug_assert_eq!(grad_out.len(), oh * ow * c);
        let row_len = ow * c;
        let mut tmp = vec![0.0; self.h * row_len];
        for (oy, t) in self.rows.iter().enumerate() {
            let g = &grad_out[oy * row_len..(oy + 1) * row_len];
            for (d, &v) in tmp[t.lo * row_len..(t.lo + 1) * row_len].iter_mut().zip(g) {
                *d += t.w_lo * v;
            }
            for (d, &v) in tmp[t.hi * row_len..(t.hi + 1) * row_len].iter_mut().zip(g) {
                *d += t.w_hi * v;
            }
        }
        let mut grad_in = vec![0.0; self.h * self.w * c];
        for y in 0..self.h {
            for (ox, t) in self.cols.iter().enumerate() {
                let g = &tmp[(y * ow + ox) * c..(y * ow + ox + 1) * c];
                let lo = (y * self.w + t.lo) * c;
                for (d, &v) in grad_in[lo..lo + c].iter_mut().zip(g) {
                    *d += t.w_lo * v;
                }
                let hi = (y * self.w + t.hi) * c;
                for (d, &v) in grad_in[hi..hi + c].iter_mut().zip(g) {
                    *d += t.w_hi * v;
                }
            }
        }
        grad_in
    }
}
