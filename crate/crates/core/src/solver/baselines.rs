//! Classical alternating-projection baselines: error reduction
//! (Gerchberg–Saxton style) and Fienup's hybrid input-output.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dims, invalid, Result};
use crate::fft::Fourier2;
use crate::forward::MagnitudeField;
use crate::grid::{crop_unchecked, ImageGrid, MeasurementPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Gs,
    Hio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOptions {
    pub iters: usize,
    /// HIO feedback parameter; ignored by error reduction.
    pub beta: f64,
    /// Additionally clamp values inside the support to at most 1.
    pub box_constraint: bool,
    pub seed: u64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self { iters: 1000, beta: 0.9, box_constraint: false, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub x: ImageGrid,
    /// `(1/2m) Σ (|F g_k| − max(b, 0))²` for every iterate g_0 … g_K.
    pub errors: Vec<f64>,
}

impl BaselineRun {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("at least the starting point")
    }
}

struct Projector<'a> {
    plan: &'a MeasurementPlan,
    /// Measured magnitudes clamped at zero; noisy data may dip below it and
    /// no spectrum has a negative modulus.
    b: Vec<f64>,
    fourier: Fourier2,
    box_constraint: bool,
}

impl Projector<'_> {
    fn in_support(&self, idx: usize) -> bool {
        let (n1, n2) = self.plan.image_dims();
        let (_, m2) = self.plan.measurement_dims();
        idx / m2 < n1 && idx % m2 < n2
    }

    fn upper(&self) -> f64 {
        if self.box_constraint {
            1.0
        } else {
            f64::INFINITY
        }
    }

    /// Replaces Fourier magnitudes by `b`, keeping phases (phase 0 where the
    /// spectrum vanishes). Also returns the magnitude error of `g`.
    fn magnitude(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let mut spectrum = self.fourier.forward_real(g);
        let mut err = 0.0;
        for (z, &bv) in spectrum.iter_mut().zip(&self.b) {
            let a = z.norm();
            err += (a - bv) * (a - bv);
            *z = if a > 0.0 { *z * (bv / a) } else { Complex64::new(bv, 0.0) };
        }
        (self.fourier.inverse_real(spectrum), err / (2.0 * g.len() as f64))
    }

    fn error(&self, g: &[f64]) -> f64 {
        self.magnitude(g).1
    }

    fn project(&self, g: &mut [f64]) {
        let hi = self.upper();
        for (idx, v) in g.iter_mut().enumerate() {
            *v = if self.in_support(idx) { v.clamp(0.0, hi) } else { 0.0 };
        }
    }
}

/// Runs error reduction or HIO from a uniform random start inside the support.
pub fn run_baseline(
    kind: BaselineKind,
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    opts: &BaselineOptions,
) -> Result<BaselineRun> {
    check_dims("measurements", plan.measurement_dims(), b.dims())?;
    if kind == BaselineKind::Hio && !(opts.beta > 0.0 && opts.beta <= 1.0) {
        return Err(invalid(format!("HIO beta must lie in (0, 1], got {}", opts.beta)));
    }
    let (m1, m2) = plan.measurement_dims();
    let proj = Projector {
        plan,
        b: b.as_slice().iter().map(|v| v.max(0.0)).collect(),
        fourier: Fourier2::new(m1, m2),
        box_constraint: opts.box_constraint,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut g: Vec<f64> =
        (0..plan.m()).map(|idx| if proj.in_support(idx) { rng.gen::<f64>() } else { 0.0 }).collect();

    let mut errors = Vec::with_capacity(opts.iters + 1);
    for _ in 0..opts.iters {
        let (gp, err) = proj.magnitude(&g);
        errors.push(err);
        match kind {
            BaselineKind::Gs => {
                g = gp;
                proj.project(&mut g);
            }
            BaselineKind::Hio => {
                let hi = proj.upper();
                for (idx, (gv, &pv)) in g.iter_mut().zip(&gp).enumerate() {
                    let valid = proj.in_support(idx) && pv >= 0.0 && pv <= hi;
                    *gv = if valid { pv } else { *gv - opts.beta * pv };
                }
            }
        }
    }
    proj.project(&mut g);
    errors.push(proj.error(&g));
    Ok(BaselineRun { x: crop_unchecked(&g, plan), errors })
}

/// Error reduction with the support + nonnegativity projection.
pub fn gs(b: &MagnitudeField, plan: &MeasurementPlan, iters: usize, seed: u64) -> Result<ImageGrid> {
    let opts = BaselineOptions { iters, seed, ..Default::default() };
    Ok(run_baseline(BaselineKind::Gs, b, plan, &opts)?.x)
}

/// Fienup's hybrid input-output with feedback `beta_hio`.
pub fn hio(
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    iters: usize,
    beta_hio: f64,
    seed: u64,
) -> Result<ImageGrid> {
    let opts = BaselineOptions { iters, beta: beta_hio, seed, ..Default::default() };
    Ok(run_baseline(BaselineKind::Hio, b, plan, &opts)?.x)
}

/// Runs `starts` independent random starts (seeds `seed, seed+1, …`) and
/// keeps the one with the smallest final magnitude error. Ground truth is
/// never consulted.
pub fn best_of_starts(
    kind: BaselineKind,
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    opts: &BaselineOptions,
    starts: usize,
) -> Result<BaselineRun> {
    if starts == 0 {
        return Err(invalid("need at least one start"));
    }
    let mut best: Option<BaselineRun> = None;
    for s in 0..starts as u64 {
        let o = BaselineOptions { seed: opts.seed.wrapping_add(s), ..opts.clone() };
        let run = run_baseline(kind, b, plan, &o)?;
        if best.as_ref().is_none_or(|r| run.final_error() < r.final_error()) {
            best = Some(run);
        }
    }
    Ok(best.expect("starts > 0"))
}
