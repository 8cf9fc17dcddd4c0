//! Fourier magnitude measurements and calibrated Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft::Fourier2;
use crate::grid::{pad, Grid, ImageGrid, MeasurementPlan};

/// Marker for Fourier magnitude data (nonnegative unless noise was added).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierMagnitude;

/// The measured magnitudes `b`, m1×m2.
pub type MagnitudeField = Grid<FourierMagnitude>;

/// Measurement plan with `m_i = round(r·n_i)`, ties rounded up.
pub fn plan_from_ratio(n1: usize, n2: usize, ratio: f64) -> Result<MeasurementPlan> {
    if !ratio.is_finite() || ratio < 1.0 {
        return Err(invalid(format!("sampling ratio must be >= 1, got {ratio}")));
    }
    let side = |n: usize| (ratio * n as f64 + 0.5).floor() as usize;
    MeasurementPlan::with_ratio(n1, n2, side(n1), side(n2), ratio)
}

/// `b = |F P x|`.
pub fn measure(x: &ImageGrid, plan: &MeasurementPlan) -> Result<MagnitudeField> {
    let padded = pad(x, plan)?;
    let (m1, m2) = plan.measurement_dims();
    let spectrum = Fourier2::new(m1, m2).forward_real(padded.as_slice());
    Ok(MagnitudeField::from_raw(m1, m2, spectrum.iter().map(|c| c.norm()).collect()))
}

/// Population variance of all entries.
pub fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Noise standard deviation giving `snr_db = 20·log10(Var(b)/σ²)`.
pub fn sigma_for_snr(b: &MagnitudeField, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(invalid(format!("snr must be finite, got {snr_db}")));
    }
    let var = population_variance(b.as_slice());
    if var <= 0.0 {
        return Err(invalid("measurement variance is zero; SNR is undefined"));
    }
    Ok((var / 10f64.powf(snr_db / 20.0)).sqrt())
}

/// Inverse of [`sigma_for_snr`].
pub fn snr_for_sigma(b: &MagnitudeField, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(invalid("sigma must be positive to define an SNR"));
    }
    let var = population_variance(b.as_slice());
    Ok(20.0 * (var / (sigma * sigma)).log10())
}

/// `b + δ` with δ i.i.d. N(0, σ²) drawn from a ChaCha stream keyed by `seed`.
/// Negative results are kept as-is.
pub fn add_noise(b: &MagnitudeField, sigma: f64, seed: u64) -> Result<MagnitudeField> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("sigma must be a nonnegative number, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(b.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = b
        .as_slice()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect();
    Ok(MagnitudeField::from_raw(b.rows(), b.cols(), data))
}

/// Noise level of a simulated measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `None` means noiseless.
    pub snr_db: Option<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self { snr_db: None, sigma: 0.0, seed: 0 }
    }

    /// Calibrates σ against the clean magnitudes `b`.
    pub fn for_snr(b: &MagnitudeField, snr_db: f64, seed: u64) -> Result<Self> {
        Ok(Self { snr_db: Some(snr_db), sigma: sigma_for_snr(b, snr_db)?, seed })
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Clean magnitudes plus noise at the requested SNR (if any).
pub fn simulate(
    x: &ImageGrid,
    plan: &MeasurementPlan,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<(MagnitudeField, NoiseSpec)> {
    let clean = measure(x, plan)?;
    match snr_db {
        None => Ok((clean, NoiseSpec::noiseless())),
        Some(snr) => {
            let spec = NoiseSpec::for_snr(&clean, snr, seed)?;
            let noisy = add_noise(&clean, spec.sigma, seed)?;
            Ok((noisy, spec))
        }
    }
}
