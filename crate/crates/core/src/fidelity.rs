//! Smoothed amplitude fidelity
//! `f(u) = (1/2m) Σ (sqrt(b² + ε) - sqrt(|Fu|² + ε))²` and its gradient.

use num_complex::Complex64;

use crate::error::{check_dims, invalid, Result};
use crate::fft::Fourier2;
use crate::forward::MagnitudeField;
use crate::grid::PaddedGrid;

/// Default smoothing parameter ε.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Measurements plus the precomputed `sqrt(b² + ε)` and transform plans.
#[derive(Debug, Clone)]
pub struct FidelityContext {
    b: MagnitudeField,
    epsilon: f64,
    smoothed_b: Vec<f64>,
    fourier: Fourier2,
}

impl FidelityContext {
    pub fn new(b: MagnitudeField, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let smoothed_b = b.as_slice().iter().map(|&v| (v * v + epsilon).sqrt()).collect();
        let fourier = Fourier2::new(b.rows(), b.cols());
        Ok(Self { b, epsilon, smoothed_b, fourier })
    }

    pub fn measurements(&self) -> &MagnitudeField {
        &self.b
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn smoothed_measurements(&self) -> &[f64] {
        &self.smoothed_b
    }

    pub fn fourier(&self) -> &Fourier2 {
        &self.fourier
    }

    pub fn dims(&self) -> (usize, usize) {
        self.b.dims()
    }

    fn check(&self, u: &PaddedGrid) -> Result<()> {
        check_dims("measurement grid", self.b.dims(), u.dims())
    }

    /// f(u); always nonnegative.
    pub fn fidelity(&self, u: &PaddedGrid) -> Result<f64> {
        self.check(u)?;
        Ok(self.fidelity_raw(u.as_slice()))
    }

    /// ∇f(u) = u - F⁻¹((sqrt(b²+ε)/sqrt(|Fu|²+ε)) ⊙ Fu).
    pub fn gradient(&self, u: &PaddedGrid) -> Result<PaddedGrid> {
        self.check(u)?;
        let (r, c) = u.dims();
        Ok(PaddedGrid::from_raw(r, c, self.gradient_raw(u.as_slice())))
    }

    pub(crate) fn fidelity_raw(&self, u: &[f64]) -> f64 {
        let spectrum = self.fourier.forward_real(u);
        self.fidelity_of_spectrum(&spectrum)
    }

    pub(crate) fn fidelity_of_spectrum(&self, spectrum: &[Complex64]) -> f64 {
        let m = spectrum.len() as f64;
        let sum: f64 = spectrum
            .iter()
            .zip(&self.smoothed_b)
            .map(|(z, &sb)| {
                let d = sb - (z.norm_sqr() + self.epsilon).sqrt();
                d * d
            })
            .sum();
        sum / (2.0 * m)
    }

    pub(crate) fn gradient_raw(&self, u: &[f64]) -> Vec<f64> {
        let projected = self.smoothed_projection(u);
        u.iter().zip(projected).map(|(a, p)| a - p).collect()
    }

    /// `Re F⁻¹(ratio ⊙ F u)`: the smoothed Fourier-magnitude projection of `u`.
    pub(crate) fn smoothed_projection(&self, u: &[f64]) -> Vec<f64> {
        let mut spectrum = self.fourier.forward_real(u);
        for (z, &sb) in spectrum.iter_mut().zip(&self.smoothed_b) {
            *z *= sb / (z.norm_sqr() + self.epsilon).sqrt();
        }
        self.fourier.inverse_real(spectrum)
    }
}

/// Free-function form of [`FidelityContext::fidelity`].
pub fn fidelity(ctx: &FidelityContext, u: &PaddedGrid) -> Result<f64> {
    ctx.fidelity(u)
}

/// Free-function form of [`FidelityContext::gradient`].
pub fn fidelity_gradient(ctx: &FidelityContext, u: &PaddedGrid) -> Result<PaddedGrid> {
    ctx.gradient(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::dft2_forward;

    fn lcg_grid(rows: usize, cols: usize, seed: u64) -> PaddedGrid {
        let mut s = seed;
        PaddedGrid::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn consistent_point_has_zero_fidelity_and_gradient() {
        let u = lcg_grid(6, 5, 3);
        let spec = dft2_forward(&u);
        let b = MagnitudeField::new(6, 5, spec.as_slice().iter().map(|z| z.norm()).collect()).unwrap();
        let ctx = FidelityContext::new(b, 1e-3).unwrap();
        assert!(ctx.fidelity(&u).unwrap() < 1e-28);
        let g = ctx.gradient(&u).unwrap();
        assert!(g.as_slice().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn closed_form_at_zero() {
        let b = MagnitudeField::new(2, 2, vec![1.0, 2.0, 0.5, 0.0]).unwrap();
        let eps = 0.01;
        let ctx = FidelityContext::new(b.clone(), eps).unwrap();
        let expected: f64 =
            b.as_slice().iter().map(|v| ((v * v + eps).sqrt() - eps.sqrt()).powi(2)).sum::<f64>() / 8.0;
        let got = ctx.fidelity(&PaddedGrid::zeros(2, 2)).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_epsilon_and_shapes() {
        let b = MagnitudeField::zeros(3, 3);
        assert!(FidelityContext::new(b.clone(), 0.0).is_err());
        let ctx = FidelityContext::new(b, 1e-3).unwrap();
        assert!(ctx.fidelity(&PaddedGrid::zeros(3, 4)).is_err());
        assert!(ctx.gradient(&PaddedGrid::zeros(4, 3)).is_err());
    }
}
