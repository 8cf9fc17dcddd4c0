//! Measurements on disk: raw little-endian f64 samples plus a JSON sidecar.

use std::path::{Path, PathBuf};

use phaseret::forward::{MagnitudeField, NoiseSpec};
use phaseret::MeasurementPlan;
use serde::{Deserialize, Serialize};

use crate::error::{format_err, io_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementMeta {
    /// Measurement grid m1×m2.
    pub rows: usize,
    pub cols: usize,
    /// Image grid n1×n2.
    pub image_rows: usize,
    pub image_cols: usize,
    pub ratio: f64,
    /// `None` for noiseless data.
    pub snr: Option<f64>,
    pub sigma: f64,
    pub seed: u64,
    /// Raw sample file, relative to the sidecar.
    pub data: String,
}

impl MeasurementMeta {
    pub fn new(plan: &MeasurementPlan, noise: &NoiseSpec, data: impl Into<String>) -> Self {
        let (rows, cols) = plan.measurement_dims();
        let (image_rows, image_cols) = plan.image_dims();
        Self {
            rows,
            cols,
            image_rows,
            image_cols,
            ratio: plan.ratio(),
            snr: noise.snr_db,
            sigma: noise.sigma,
            seed: noise.seed,
            data: data.into(),
        }
    }

    pub fn plan(&self) -> Result<MeasurementPlan> {
        Ok(MeasurementPlan::with_ratio(self.image_rows, self.image_cols, self.rows, self.cols, self.ratio)?)
    }
}

/// Writes `<stem>.f64` and `<stem>.json` into `dir`; returns the sidecar path.
pub fn write_measurements(
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    noise: &NoiseSpec,
    dir: &Path,
    stem: &str,
) -> Result<PathBuf> {
    let data_name = format!("{stem}.f64");
    let raw: Vec<u8> = b.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect();
    let data_path = dir.join(&data_name);
    std::fs::write(&data_path, raw).map_err(io_err(&data_path))?;
    let meta = MeasurementMeta::new(plan, noise, data_name);
    let json_path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&meta)?;
    std::fs::write(&json_path, text + "\n").map_err(io_err(&json_path))?;
    Ok(json_path)
}

pub fn read_measurements(
    sidecar: impl AsRef<Path>,
) -> Result<(MagnitudeField, MeasurementPlan, MeasurementMeta)> {
    let sidecar = sidecar.as_ref();
    let text = std::fs::read_to_string(sidecar).map_err(io_err(sidecar))?;
    let meta: MeasurementMeta = serde_json::from_str(&text)?;
    let data_path = sidecar.parent().unwrap_or(Path::new(".")).join(&meta.data);
    let raw = std::fs::read(&data_path).map_err(io_err(&data_path))?;
    if raw.len() != meta.rows * meta.cols * 8 {
        return Err(format_err(
            &data_path,
            format!("expected {} samples, file holds {} bytes", meta.rows * meta.cols, raw.len()),
        ));
    }
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let b = MagnitudeField::new(meta.rows, meta.cols, values)?;
    let plan = meta.plan()?;
    Ok((b, plan, meta))
}
