use std::time::Instant;

use super::{loop_schedule, lr_schedule, Mode, SolverConfig, SolverTrace, TraceRecord};
use crate::decoder::{init_latent, init_params, AdamState, Decoder, DecoderParams};
use crate::error::{check_dims, invalid, Result};
use crate::fidelity::FidelityContext;
use crate::forward::MagnitudeField;
use crate::grid::{crop_unchecked, pad_unchecked, ImageGrid, MeasurementPlan, PaddedGrid};
use crate::metrics::{aligned_psnr, clamp_unit};
use crate::tv::{tv_norm, x_update_raw};

/// `x₀ = crop(Re F⁻¹ b)`.
pub fn initial_estimate(b: &MagnitudeField, plan: &MeasurementPlan) -> Result<ImageGrid> {
    check_dims("measurements", plan.measurement_dims(), b.dims())?;
    let (m1, m2) = plan.measurement_dims();
    let fourier = crate::fft::Fourier2::new(m1, m2);
    let spectrum = b.as_slice().iter().map(|&v| v.into()).collect();
    Ok(crop_unchecked(&fourier.inverse_real(spectrum), plan))
}

/// `u = w − (1/ρ)∇f(w)` with `w = P x − η/ρ`.
pub fn u_step(
    x: &ImageGrid,
    eta: &PaddedGrid,
    ctx: &FidelityContext,
    rho: f64,
    plan: &MeasurementPlan,
) -> Result<PaddedGrid> {
    if !(rho > 0.0) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    check_dims("x", plan.image_dims(), x.dims())?;
    check_dims("eta", plan.measurement_dims(), eta.dims())?;
    check_dims("measurements", plan.measurement_dims(), ctx.dims())?;
    let (m1, m2) = plan.measurement_dims();
    Ok(PaddedGrid::from_raw(m1, m2, u_step_raw(x.as_slice(), eta.as_slice(), ctx, rho, plan)))
}

fn u_step_raw(x: &[f64], eta: &[f64], ctx: &FidelityContext, rho: f64, plan: &MeasurementPlan) -> Vec<f64> {
    let px = pad_unchecked(x, plan);
    let w: Vec<f64> = px.as_slice().iter().zip(eta).map(|(p, e)| p - e / rho).collect();
    let grad = ctx.gradient_raw(&w);
    w.iter().zip(grad).map(|(a, g)| a - g / rho).collect()
}

struct Generator {
    net: Decoder,
    params: DecoderParams,
    state: AdamState,
}

impl Generator {
    fn new(cfg: &SolverConfig, plan: &MeasurementPlan) -> Result<Self> {
        let (n1, n2) = plan.image_dims();
        let dcfg = cfg.decoder_config(n1, n2)?;
        let latent = init_latent(&dcfg, cfg.latent_seed());
        let params = init_params(&dcfg, cfg.param_seed());
        let state = AdamState::new(&params);
        let net = Decoder::new(dcfg, latent)?.with_parallel(cfg.parallel);
        Ok(Self { net, params, state })
    }
}

/// Runs the outer loop in whatever mode `cfg.mode` names. `truth`, when
/// given, is only used to fill the PSNR column of the trace.
pub fn solve(
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    cfg: &SolverConfig,
    truth: Option<&ImageGrid>,
) -> Result<(ImageGrid, SolverTrace)> {
    cfg.validate()?;
    check_dims("measurements", plan.measurement_dims(), b.dims())?;
    if let Some(t) = truth {
        check_dims("truth", plan.image_dims(), t.dims())?;
    }
    let start = Instant::now();
    let ctx = FidelityContext::new(b.clone(), cfg.epsilon)?;
    let (n1, n2) = plan.image_dims();
    let rho = cfg.rho;
    let alpha = cfg.effective_alpha();
    let mut generator = if cfg.mode.uses_decoder() { Some(Generator::new(cfg, plan)?) } else { None };

    let mut x = initial_estimate(b, plan)?;
    let mut eta = vec![0.0; plan.m()];
    let mut records = Vec::with_capacity(cfg.iters + 1);

    let record = |k: usize, x: &ImageGrid| -> Result<TraceRecord> {
        let fidelity = ctx.fidelity_raw(pad_unchecked(x.as_slice(), plan).as_slice());
        let psnr = match truth {
            Some(t) => Some(aligned_psnr(&clamp_unit(x), t)?),
            None => None,
        };
        Ok(TraceRecord {
            k,
            mu: cfg.mu(k),
            gamma: lr_schedule(k, cfg),
            l: if cfg.fits_decoder(k) { loop_schedule(k, cfg) } else { 0 },
            fidelity,
            tv: tv_norm(x, cfg.tv_mode),
            time_ms: start.elapsed().as_secs_f64() * 1e3,
            psnr,
        })
    };
    records.push(record(0, &x)?);

    for k in 0..cfg.iters {
        let u = u_step_raw(x.as_slice(), &eta, &ctx, rho, plan);
        let v = match generator.as_mut() {
            Some(g) if cfg.fits_decoder(k) => {
                let target = crop_unchecked(&u, plan);
                let steps = loop_schedule(k, cfg);
                g.net.fit(&mut g.params, &mut g.state, &target, steps, lr_schedule(k, cfg))?;
                let out = g.net.forward(&g.params)?;
                let pg = pad_unchecked(out.as_slice(), plan).into_vec();
                if cfg.mode == Mode::Accelerated {
                    let mu = cfg.mu(k);
                    pg.iter().zip(&u).map(|(gv, uv)| mu * gv + (1.0 - mu) * uv).collect()
                } else {
                    pg
                }
            }
            _ => u,
        };
        x = x_update_raw(&v, &eta, rho, alpha, plan);
        let px = pad_unchecked(x.as_slice(), plan);
        for ((e, vv), p) in eta.iter_mut().zip(&v).zip(px.as_slice()) {
            *e += rho * (vv - p);
        }
        if !x.as_slice().iter().all(|v| v.is_finite()) {
            return Err(invalid(format!("iterate became non-finite at k = {}", k + 1)));
        }
        records.push(record(k + 1, &x)?);
    }
    debug_assert_eq!(x.dims(), (n1, n2));
    Ok((x, SolverTrace { records }))
}

fn require_mode(cfg: &SolverConfig, allowed: &[Mode]) -> Result<()> {
    if allowed.contains(&cfg.mode) {
        Ok(())
    } else {
        Err(invalid(format!("solver mode {} not accepted here", cfg.mode)))
    }
}

pub fn vanilla_trad(
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    cfg: &SolverConfig,
    truth: Option<&ImageGrid>,
) -> Result<(ImageGrid, SolverTrace)> {
    require_mode(cfg, &[Mode::Vanilla])?;
    solve(b, plan, cfg, truth)
}

pub fn accelerated_trad(
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    cfg: &SolverConfig,
    truth: Option<&ImageGrid>,
) -> Result<(ImageGrid, SolverTrace)> {
    require_mode(cfg, &[Mode::Accelerated])?;
    solve(b, plan, cfg, truth)
}

pub fn ablation_solve(
    b: &MagnitudeField,
    plan: &MeasurementPlan,
    cfg: &SolverConfig,
    truth: Option<&ImageGrid>,
) -> Result<(ImageGrid, SolverTrace)> {
    require_mode(cfg, &[Mode::TvOnly, Mode::DdOnly, Mode::NoReg])?;
    solve(b, plan, cfg, truth)
}
