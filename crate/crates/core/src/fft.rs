//! Two-dimensional DFT with an unnormalized forward and a 1/m inverse.
//!
//! Under this convention the gradient of the 1/(2m)-scaled smoothed fidelity
//! is exactly `u - F⁻¹(ratio ⊙ F u)`; the fidelity module depends on it.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{ComplexSpectrum, PaddedGrid};

/// Cached row/column plans for one m1×m2 shape. Arbitrary (non power-of-two)
/// sizes are supported.
#[derive(Clone)]
pub struct Fourier2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier2").field("rows", &self.rows).field("cols", &self.cols).finish()
    }
}

impl Fourier2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "transform dimensions must be positive");
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward transform of a real row-major buffer.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.len());
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Unnormalized forward transform, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, &*self.row_fwd, &*self.col_fwd);
    }

    /// Inverse transform scaled by 1/m, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, &*self.row_inv, &*self.col_inv);
        let scale = 1.0 / self.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Real part of the 1/m-scaled inverse transform.
    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], row: &dyn Fft<f64>, col: &dyn Fft<f64>) {
        assert_eq!(buf.len(), self.len());
        let (rows, cols) = (self.rows, self.cols);
        let scratch_len = row.get_inplace_scratch_len().max(col.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        if cols > 1 {
            row.process_with_scratch(buf, &mut scratch);
        }
        if rows > 1 {
            let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
            transpose(buf, &mut t, rows, cols);
            col.process_with_scratch(&mut t, &mut scratch);
            transpose(&t, buf, cols, rows);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            dst[j * rows + i] = src[i * cols + j];
        }
    }
}

/// Unnormalized 2D DFT of a real padded grid.
pub fn dft2_forward(x: &PaddedGrid) -> ComplexSpectrum {
    let plan = Fourier2::new(x.rows(), x.cols());
    ComplexSpectrum::from_raw(x.rows(), x.cols(), plan.forward_real(x.as_slice()))
}

/// Real part of the 1/m-scaled inverse 2D DFT.
pub fn dft2_inverse(s: &ComplexSpectrum) -> PaddedGrid {
    let plan = Fourier2::new(s.rows(), s.cols());
    PaddedGrid::from_raw(s.rows(), s.cols(), plan.inverse_real(s.as_slice().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let x = PaddedGrid::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let s = dft2_forward(&x);
        for v in s.as_slice() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_transforms_to_dc() {
        let x = PaddedGrid::filled(2, 2, 0.7);
        let s = dft2_forward(&x);
        assert!((s.get(0, 0) - c(2.8, 0.0)).norm() < 1e-15);
        for idx in 1..4 {
            assert!(s.as_slice()[idx].norm() < 1e-15);
        }
    }

    #[test]
    fn all_ones_spectrum_inverts_to_impulse() {
        let s = ComplexSpectrum::new(2, 2, vec![c(1.0, 0.0); 4]).unwrap();
        let x = dft2_inverse(&s);
        assert_eq!(x.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn degenerate_single_row_and_column() {
        let x = PaddedGrid::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let back = dft2_inverse(&dft2_forward(&x));
        assert!(back.max_abs_diff(&x) < 1e-14);
        let y = PaddedGrid::new(3, 1, vec![1.0, -2.0, 0.5]).unwrap();
        let back = dft2_inverse(&dft2_forward(&y));
        assert!(back.max_abs_diff(&y) < 1e-14);
    }
}
