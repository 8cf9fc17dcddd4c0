#![allow(dead_code)]

use num_complex::Complex64;
use phaseret::forward::MagnitudeField;
use phaseret::{ImageGrid, PaddedGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn image(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ImageGrid {
    ImageGrid::new(rows, cols, uniform(rng, rows * cols, 0.0, 1.0)).unwrap()
}

pub fn padded(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> PaddedGrid {
    PaddedGrid::new(rows, cols, uniform(rng, rows * cols, -1.0, 1.0)).unwrap()
}

pub fn magnitudes(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> MagnitudeField {
    MagnitudeField::new(rows, cols, uniform(rng, rows * cols, 0.0, 3.0)).unwrap()
}

/// Direct double-sum DFT, `sign = -1` forward, `+1` (unscaled) inverse.
pub fn direct_dft(x: &[Complex64], rows: usize, cols: usize, sign: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for k1 in 0..rows {
        for k2 in 0..cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for j1 in 0..rows {
                for j2 in 0..cols {
                    let phase = sign
                        * 2.0
                        * std::f64::consts::PI
                        * ((k1 * j1) as f64 / rows as f64 + (k2 * j2) as f64 / cols as f64);
                    acc += x[j1 * cols + j2] * Complex64::from_polar(1.0, phase);
                }
            }
            out[k1 * cols + k2] = acc;
        }
    }
    out
}

pub fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Central finite difference of `f` along every coordinate of `x`.
pub fn central_fd(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|i| {
            work[i] = x[i] + h;
            let plus = f(&work);
            work[i] = x[i] - h;
            let minus = f(&work);
            work[i] = x[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Fourth-order central difference `(−f₊₂ + 8f₊₁ − 8f₋₁ + f₋₂) / 12h`.
pub fn central_fd4(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut work = x.to_vec();
    let mut at = |w: &mut Vec<f64>, i: usize, d: f64| {
        w[i] = x[i] + d;
        let v = f(w);
        w[i] = x[i];
        v
    };
    (0..x.len())
        .map(|i| {
            let (p2, p1) = (at(&mut work, i, 2.0 * h), at(&mut work, i, h));
            let (m1, m2) = (at(&mut work, i, -h), at(&mut work, i, -2.0 * h));
            (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
        })
        .collect()
}

/// `10·log10(1/MSE)` with the library's cap.
pub fn psnr_oracle(a: &ImageGrid, b: &ImageGrid) -> f64 {
    let n = a.len() as f64;
    let mse = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n;
    (10.0 * (1.0 / mse).log10()).min(phaseret::metrics::PSNR_CAP_DB)
}

/// Window-by-window SSIM with an explicit 2D Gaussian weight table.
pub fn ssim_oracle(a: &ImageGrid, b: &ImageGrid) -> f64 {
    let (r, c) = a.dims();
    let (wr, wc) = (11.min(r), 11.min(c));
    let g = |len: usize| -> Vec<f64> {
        let mid = (len as f64 - 1.0) / 2.0;
        let raw: Vec<f64> =
            (0..len).map(|i| (-((i as f64 - mid).powi(2)) / (2.0 * 1.5 * 1.5)).exp()).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    };
    let (gr, gc) = (g(wr), g(wc));
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let mut total = 0.0;
    let mut count = 0usize;
    for i0 in 0..=r - wr {
        for j0 in 0..=c - wc {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for di in 0..wr {
                for dj in 0..wc {
                    let w = gr[di] * gc[dj];
                    let (x, y) = (a.get(i0 + di, j0 + dj), b.get(i0 + di, j0 + dj));
                    mx += w * x;
                    my += w * y;
                    sxx += w * x * x;
                    syy += w * y * y;
                    sxy += w * x * y;
                }
            }
            let (vx, vy, cov) = (sxx - mx * mx, syy - my * my, sxy - mx * my);
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}
