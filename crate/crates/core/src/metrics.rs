//! Reconstruction quality: PSNR, SSIM and alignment modulo the trivial
//! ambiguities of Fourier magnitudes (180° rotation and circular shift).

use num_complex::Complex64;

use crate::error::{check_dims, Result};
use crate::fft::Fourier2;
use crate::grid::ImageGrid;

/// Reported for identical images, and the upper clamp for all PSNR values.
pub const PSNR_CAP_DB: f64 = 150.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

pub fn mse(candidate: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    check_dims("truth", truth.dims(), candidate.dims())?;
    let sum: f64 = candidate.as_slice().iter().zip(truth.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / truth.len() as f64)
}

/// `10·log10(1/MSE)` with peak 1, capped at [`PSNR_CAP_DB`].
pub fn psnr(candidate: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    let e = mse(candidate, truth)?;
    if e == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((-10.0 * e.log10()).min(PSNR_CAP_DB))
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size as f64 - 1.0) / 2.0;
    let k: Vec<f64> =
        (0..size).map(|i| (-(i as f64 - center).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = k.iter().sum();
    k.into_iter().map(|v| v / total).collect()
}

/// Separable 'valid' filtering with a 1D kernel along rows then columns.
fn filter_valid(v: &[f64], rows: usize, cols: usize, kr: &[f64], kc: &[f64]) -> Vec<f64> {
    let out_c = cols - kc.len() + 1;
    let out_r = rows - kr.len() + 1;
    let mut tmp = vec![0.0; rows * out_c];
    for i in 0..rows {
        let row = &v[i * cols..(i + 1) * cols];
        for j in 0..out_c {
            tmp[i * out_c + j] = kc.iter().zip(&row[j..]).map(|(k, x)| k * x).sum();
        }
    }
    let mut out = vec![0.0; out_r * out_c];
    for i in 0..out_r {
        for j in 0..out_c {
            out[i * out_c + j] = kr.iter().enumerate().map(|(t, k)| k * tmp[(i + t) * out_c + j]).sum();
        }
    }
    out
}

/// Mean single-scale SSIM over all fully-contained 11×11 Gaussian windows
/// (σ = 1.5, K1 = 0.01, K2 = 0.03, L = 1). Images smaller than the window
/// use a window truncated to the image size.
pub fn ssim(candidate: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    check_dims("truth", truth.dims(), candidate.dims())?;
    let (rows, cols) = truth.dims();
    let kr = gaussian_kernel(SSIM_WINDOW.min(rows), SSIM_SIGMA);
    let kc = gaussian_kernel(SSIM_WINDOW.min(cols), SSIM_SIGMA);
    let x = candidate.as_slice();
    let y = truth.as_slice();
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let f = |v: &[f64]| filter_valid(v, rows, cols, &kr, &kc);
    let (mx, my, sxx, syy, sxy) = (f(x), f(y), f(&xx), f(&yy), f(&xy));
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// Transform applied to the candidate: optional 180° rotation, then a
/// circular shift so that `aligned[i][j] = t(candidate)[(i-dy) mod n1][(j-dx) mod n2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AlignTransform {
    pub flip180: bool,
    pub shift: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub aligned: ImageGrid,
    pub transform: AlignTransform,
    /// Correlation `Σ truth·aligned` at the chosen transform.
    pub score: f64,
}

pub fn rotate180(x: &ImageGrid) -> ImageGrid {
    let (r, c) = x.dims();
    ImageGrid::from_fn(r, c, |i, j| x.get(r - 1 - i, c - 1 - j))
}

pub fn circular_shift(x: &ImageGrid, dy: usize, dx: usize) -> ImageGrid {
    let (r, c) = x.dims();
    ImageGrid::from_fn(r, c, |i, j| x.get((i + r - dy % r) % r, (j + c - dx % c) % c))
}

pub fn apply_transform(x: &ImageGrid, t: AlignTransform) -> ImageGrid {
    let base = if t.flip180 { rotate180(x) } else { x.clone() };
    circular_shift(&base, t.shift.0, t.shift.1)
}

/// Searches {identity, 180° rotation} × all circular shifts for the maximum
/// correlation with `truth`, using FFT cross-correlation. Ties keep the
/// earliest candidate (identity first, then row-major shift order).
pub fn align(candidate: &ImageGrid, truth: &ImageGrid) -> Result<AlignmentResult> {
    check_dims("truth", truth.dims(), candidate.dims())?;
    let (r, c) = truth.dims();
    let fourier = Fourier2::new(r, c);
    let t_hat = fourier.forward_real(truth.as_slice());
    let mut best: Option<(f64, AlignTransform)> = None;
    for flip180 in [false, true] {
        let base = if flip180 { rotate180(candidate) } else { candidate.clone() };
        let c_hat = fourier.forward_real(base.as_slice());
        let prod: Vec<Complex64> = t_hat.iter().zip(&c_hat).map(|(t, c)| t * c.conj()).collect();
        let corr = fourier.inverse_real(prod);
        for (idx, &score) in corr.iter().enumerate() {
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, AlignTransform { flip180, shift: (idx / c, idx % c) }));
            }
        }
    }
    let (_, transform) = best.expect("non-empty search");
    let aligned = apply_transform(candidate, transform);
    let score = aligned.as_slice().iter().zip(truth.as_slice()).map(|(a, b)| a * b).sum();
    Ok(AlignmentResult { aligned, transform, score })
}

/// PSNR after [`align`].
pub fn aligned_psnr(candidate: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    psnr(&align(candidate, truth)?.aligned, truth)
}

/// Copy with every entry clamped to [0, 1].
pub fn clamp_unit(x: &ImageGrid) -> ImageGrid {
    x.map(|v| v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(seed: u64, r: usize, c: usize) -> ImageGrid {
        let mut s = seed;
        ImageGrid::from_fn(r, c, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn psnr_closed_forms() {
        let t = img(1, 8, 8);
        assert_eq!(psnr(&t, &t).unwrap(), PSNR_CAP_DB);
        let c = t.map(|v| v + 0.1);
        assert!((psnr(&c, &t).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&c, &img(1, 8, 9)).is_err());
    }

    #[test]
    fn ssim_identity_and_constants() {
        let t = img(2, 16, 16);
        assert!((ssim(&t, &t).unwrap() - 1.0).abs() < 1e-12);
        let zero = ImageGrid::zeros(16, 16);
        let one = ImageGrid::filled(16, 16, 1.0);
        let c1 = 1e-4;
        assert!((ssim(&zero, &one).unwrap() - c1 / (1.0 + c1)).abs() < 1e-12);
    }

    #[test]
    fn ssim_small_images_use_truncated_window() {
        let t = img(3, 5, 7);
        assert!((ssim(&t, &t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn align_recovers_shift_and_flip() {
        let t = img(4, 9, 12);
        let shifted = circular_shift(&t, 3, 7);
        let a = align(&shifted, &t).unwrap();
        assert_eq!(psnr(&a.aligned, &t).unwrap(), PSNR_CAP_DB);
        assert!(!a.transform.flip180);
        let flipped = rotate180(&t);
        let a = align(&flipped, &t).unwrap();
        assert!(a.transform.flip180);
        assert_eq!(psnr(&a.aligned, &t).unwrap(), PSNR_CAP_DB);
    }
}
