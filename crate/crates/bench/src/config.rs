//! JSON configuration: a `defaults` block with solver hyperparameters and an
//! optional `experiment` block describing the grid. Command-line flags are
//! applied on top by the binary.

use std::path::{Path, PathBuf};

use phaseret::solver::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::experiment::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSettings {
    pub iters: usize,
    pub beta: f64,
    /// Random starts; the one with the smallest magnitude error is kept.
    pub starts: usize,
    pub box_constraint: bool,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self { iters: 1000, beta: 0.9, starts: 3, box_constraint: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// PGM paths or `phantom:<kind>:<size>` / `phantom:<kind>:<rows>x<cols>`.
    pub images: Vec<String>,
    pub ratios: Vec<f64>,
    /// `null` entries mean noiseless.
    pub snrs: Vec<Option<f64>>,
    pub methods: Vec<Method>,
    pub repeats: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
    pub baseline: BaselineSettings,
    /// Write per-run traces and a plotdata CSV.
    pub traces: bool,
    /// Worker threads for independent runs.
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            images: vec!["phantom:shapes:64".into()],
            ratios: vec![2.0],
            snrs: vec![None],
            methods: vec![Method::Solver(phaseret::solver::Mode::Accelerated)],
            repeats: 5,
            base_seed: 0,
            solver: SolverConfig::default(),
            baseline: BaselineSettings::default(),
            traces: false,
            threads: 1,
            out: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.images.is_empty() || self.ratios.is_empty() || self.snrs.is_empty() {
            return Err(Error::Config("images, ratios and snrs must be non-empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r >= 1.0) || !r.is_finite()) {
            return Err(Error::Config(format!("sampling ratio {r} is below 1")));
        }
        if self.baseline.starts == 0 {
            return Err(Error::Config("baseline.starts must be at least 1".into()));
        }
        self.solver.validate()?;
        Ok(())
    }
}

/// On-disk configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub defaults: SolverConfig,
    pub experiment: Option<ExperimentSpec>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The experiment block with its solver settings taken from `defaults`.
    pub fn experiment_spec(&self) -> ExperimentSpec {
        let mut spec = self.experiment.clone().unwrap_or_default();
        spec.solver = self.defaults.clone();
        spec
    }
}
