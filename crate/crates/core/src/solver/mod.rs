//! ADMM solvers with a TV regularizer and an untrained generator prior.
//!
//! One outer iteration k performs
//!
//! ```text
//! u  = P x − η/ρ − (1/ρ) ∇f(P x − η/ρ)
//! θ  ← l_k Adam steps on ‖G(θ) − P⁻¹u‖² at rate γ_k   (warm start)
//! v  = μ_k · P G(θ) + (1 − μ_k) · u
//! x  = P⁻¹(v + η/ρ) − (α/ρ) Δ P⁻¹(v + η/ρ)
//! η  = η + ρ (v − P x)
//! ```
//!
//! The vanilla solver fixes μ_k = 1. The accelerated solver lets μ_k decay
//! after κ3 and stops fitting the generator once μ_k falls below
//! [`SolverConfig::mu_floor`]. The ablation modes drop the generator
//! (`tv_only`), the Laplacian term (`dd_only`) or both (`no_reg`).

mod baselines;
mod schedule;
mod trace;
mod trad;

pub use baselines::{best_of_starts, gs, hio, run_baseline, BaselineKind, BaselineOptions, BaselineRun};
pub use schedule::{loop_schedule, lr_schedule, weight_schedule};
pub use trace::{SolverTrace, TraceRecord};
pub use trad::{ablation_solve, accelerated_trad, initial_estimate, solve, u_step, vanilla_trad};

use serde::{Deserialize, Serialize};

use crate::decoder::{DecoderConfig, DEFAULT_CN_EPSILON};
use crate::error::{invalid, Result};
use crate::fidelity::DEFAULT_EPSILON;
use crate::tv::TvMode;

/// Which variant of the outer loop to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Vanilla,
    Accelerated,
    TvOnly,
    DdOnly,
    NoReg,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Self::Vanilla, Self::Accelerated, Self::TvOnly, Self::DdOnly, Self::NoReg];

    pub fn name(self) -> &'static str {
        match self {
            Self::Vanilla => "vanilla",
            Self::Accelerated => "accelerated",
            Self::TvOnly => "tv_only",
            Self::DdOnly => "dd_only",
            Self::NoReg => "no_reg",
        }
    }

    /// Whether the generator participates at all.
    pub fn uses_decoder(self) -> bool {
        matches!(self, Self::Vanilla | Self::Accelerated | Self::DdOnly)
    }

    /// Whether the Laplacian (TV) term is active.
    pub fn uses_tv(self) -> bool {
        matches!(self, Self::Vanilla | Self::Accelerated | Self::TvOnly)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown solver mode '{s}'")))
    }
}

/// All hyperparameters of one solve. Defaults are the published settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rho: f64,
    pub epsilon: f64,
    pub alpha: f64,
    /// Outer iterations K.
    pub iters: usize,
    pub gamma0: f64,
    pub beta: f64,
    pub kappa1: usize,
    pub l0: usize,
    pub zeta: f64,
    pub kappa2: usize,
    pub kappa3: usize,
    pub lambda: f64,
    pub mode: Mode,
    pub tv_mode: TvMode,
    pub seed: u64,
    /// Decoder channels `[c0, …, cJ]`; the geometry follows the image size.
    pub channels: Vec<usize>,
    pub cn_epsilon: f64,
    /// Below this weight the generator fit is skipped and `v = u`.
    pub mu_floor: f64,
    /// Parallel decoder kernels; gives up bit-exact reproducibility.
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            epsilon: DEFAULT_EPSILON,
            alpha: 1.0 / 384.0,
            iters: 2000,
            gamma0: 0.005,
            beta: 0.5,
            kappa1: 500,
            l0: 5,
            zeta: 1.2,
            kappa2: 500,
            kappa3: 1000,
            lambda: 10.0,
            mode: Mode::Accelerated,
            tv_mode: TvMode::Isotropic,
            seed: 0,
            channels: vec![128, 128, 128, 128],
            cn_epsilon: DEFAULT_CN_EPSILON,
            mu_floor: 1e-6,
            parallel: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("rho", self.rho), ("epsilon", self.epsilon), ("lambda", self.lambda)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.zeta > 1.0) {
            return Err(invalid(format!("zeta must exceed 1, got {}", self.zeta)));
        }
        if !(self.alpha >= 0.0) {
            return Err(invalid(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if self.kappa1 == 0 || self.kappa2 == 0 {
            return Err(invalid("kappa1 and kappa2 must be positive"));
        }
        if !(self.gamma0 > 0.0) {
            return Err(invalid("gamma0 must be positive"));
        }
        Ok(())
    }

    /// Decoder geometry for an `rows×cols` image.
    pub fn decoder_config(&self, rows: usize, cols: usize) -> Result<DecoderConfig> {
        let mut cfg = DecoderConfig::for_image(rows, cols, self.channels.clone())?;
        cfg.cn_epsilon = self.cn_epsilon;
        Ok(cfg)
    }

    /// α actually applied in the x-update for this mode.
    pub fn effective_alpha(&self) -> f64 {
        if self.mode.uses_tv() {
            self.alpha
        } else {
            0.0
        }
    }

    /// μ_k for this mode: 1 for vanilla/dd_only, the decay schedule for
    /// accelerated, 0 when no generator is used.
    pub fn mu(&self, k: usize) -> f64 {
        match self.mode {
            Mode::Vanilla | Mode::DdOnly => 1.0,
            Mode::Accelerated => weight_schedule(k, self),
            Mode::TvOnly | Mode::NoReg => 0.0,
        }
    }

    /// Whether the generator is fitted at iteration k.
    pub fn fits_decoder(&self, k: usize) -> bool {
        self.mode.uses_decoder() && self.mu(k) >= self.mu_floor
    }

    pub fn latent_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }

    pub fn param_seed(&self) -> u64 {
        derive_seed(self.seed, 2)
    }
}

/// SplitMix64 finalizer over `seed + stream·golden`; used to split one seed
/// into independent streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
