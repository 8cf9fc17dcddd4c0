//! Total variation, the 5-point Laplacian and the linearized x-update.
//!
//! Both the finite differences and the Laplacian use replicate (Neumann)
//! boundaries: the difference across the last row/column is zero.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, invalid, Result};
use crate::grid::{crop_unchecked, ImageGrid, MeasurementPlan, PaddedGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvMode {
    Anisotropic,
    #[default]
    Isotropic,
}

impl std::str::FromStr for TvMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anisotropic" => Ok(Self::Anisotropic),
            "isotropic" => Ok(Self::Isotropic),
            other => Err(invalid(format!("unknown TV mode '{other}'"))),
        }
    }
}

pub fn tv_norm(x: &ImageGrid, mode: TvMode) -> f64 {
    let (rows, cols) = x.dims();
    let v = x.as_slice();
    let mut total = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let here = v[i * cols + j];
            let dh = if j + 1 < cols { v[i * cols + j + 1] - here } else { 0.0 };
            let dv = if i + 1 < rows { v[(i + 1) * cols + j] - here } else { 0.0 };
            total += match mode {
                TvMode::Anisotropic => dh.abs() + dv.abs(),
                TvMode::Isotropic => dh.hypot(dv),
            };
        }
    }
    total
}

pub fn laplacian(x: &ImageGrid) -> ImageGrid {
    let (rows, cols) = x.dims();
    ImageGrid::from_raw(rows, cols, laplacian_raw(x.as_slice(), rows, cols))
}

pub(crate) fn laplacian_raw(v: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        let up = i.saturating_sub(1);
        let down = (i + 1).min(rows - 1);
        for j in 0..cols {
            let left = j.saturating_sub(1);
            let right = (j + 1).min(cols - 1);
            let here = v[i * cols + j];
            out[i * cols + j] =
                v[up * cols + j] + v[down * cols + j] + v[i * cols + left] + v[i * cols + right] - 4.0 * here;
        }
    }
    out
}

/// `x = w - (α/ρ)·Δw` with `w = P⁻¹(v + η/ρ)`.
pub fn x_update(
    v: &PaddedGrid,
    eta: &PaddedGrid,
    rho: f64,
    alpha: f64,
    plan: &MeasurementPlan,
) -> Result<ImageGrid> {
    if !(rho > 0.0) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    check_dims("v", plan.measurement_dims(), v.dims())?;
    check_dims("eta", plan.measurement_dims(), eta.dims())?;
    Ok(x_update_raw(v.as_slice(), eta.as_slice(), rho, alpha, plan))
}

pub(crate) fn x_update_raw(
    v: &[f64],
    eta: &[f64],
    rho: f64,
    alpha: f64,
    plan: &MeasurementPlan,
) -> ImageGrid {
    let shifted: Vec<f64> = v.iter().zip(eta).map(|(a, e)| a + e / rho).collect();
    let w = crop_unchecked(&shifted, plan);
    if alpha == 0.0 {
        return w;
    }
    let (rows, cols) = w.dims();
    let lap = laplacian_raw(w.as_slice(), rows, cols);
    let step = alpha / rho;
    let data = w.as_slice().iter().zip(lap).map(|(a, l)| a - step * l).collect();
    ImageGrid::from_raw(rows, cols, data)
}
