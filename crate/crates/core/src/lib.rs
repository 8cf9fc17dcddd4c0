//! Fourier phase retrieval from few measurements with a total-variation
//! regularizer and an untrained deep-decoder prior, solved by ADMM.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`] and [`fft`]: real/complex grids, zero padding, the 2D DFT.
//! - [`forward`]: magnitude measurements and calibrated noise.
//! - [`fidelity`]: the smoothed data term and its closed-form gradient.
//! - [`decoder`]: the generator network with hand-written gradients and Adam.
//! - [`tv`]: total variation, the Laplacian and the linearized x-update.
//! - [`solver`]: the ADMM loops (vanilla and accelerated), ablations,
//!   schedules and the classical HIO / error-reduction baselines.
//! - [`metrics`]: PSNR, SSIM and ambiguity-aware alignment.
//! - [`phantom`]: deterministic synthetic test images.

pub mod decoder;
pub mod error;
pub mod fft;
pub mod fidelity;
pub mod forward;
pub mod grid;
pub mod metrics;
pub mod phantom;
pub mod solver;
pub mod tv;

pub use error::{Error, Result};
pub use grid::{ComplexSpectrum, ImageGrid, MeasurementPlan, PaddedGrid};
