use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phaseret::forward::{plan_from_ratio, simulate};
use phaseret::solver::{best_of_starts, solve, BaselineKind, BaselineOptions, SolverConfig};
use phaseret_bench::experiment::{load_source, score, BenchReport};
use phaseret_bench::measurements::{read_measurements, write_measurements};
use phaseret_bench::pgm::{load_image, save_image};
use phaseret_bench::{emit_plotdata, run_bench, run_sweep, ConfigFile, ExperimentSpec, Method};

#[derive(Parser)]
#[command(name = "fpr", version, about = "Fourier phase retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render or load an image and write its (noisy) Fourier magnitudes.
    Simulate(SimulateArgs),
    /// Recover an image from stored measurements.
    Reconstruct(ReconstructArgs),
    /// Compare a reconstruction against ground truth.
    Evaluate(EvaluateArgs),
    /// Run an experiment grid.
    Bench(BenchArgs),
    /// Run an experiment grid for every (kappa3, lambda) pair.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Outer iterations K (or baseline iterations for hio/gs).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Parallel decoder kernels; results are no longer bit-reproducible.
    #[arg(long)]
    fast: bool,
}

impl Common {
    fn config_file(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => Ok(ConfigFile::load(p)?),
            None => Ok(ConfigFile::default()),
        }
    }

    fn solver(&self, file: &ConfigFile) -> SolverConfig {
        let mut cfg = file.defaults.clone();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.iters {
            cfg.iters = k;
        }
        cfg.parallel |= self.fast;
        cfg
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// PGM path or phantom:<kind>:<size>.
    #[arg(long)]
    image: String,
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    /// SNR in dB; omit for noiseless data.
    #[arg(long)]
    snr: Option<f64>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: Common,
    /// Measurement sidecar written by `simulate`.
    #[arg(long)]
    measurements: PathBuf,
    /// Ground truth; enables the PSNR column of the trace.
    #[arg(long)]
    image: Option<String>,
    #[arg(long)]
    mode: Option<Method>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground truth (PGM path or phantom source).
    #[arg(long)]
    image: String,
    /// Reconstruction to score.
    #[arg(long)]
    candidate: PathBuf,
    /// Report metrics after undoing flips and shifts.
    #[arg(long)]
    align: bool,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    image: Vec<String>,
    #[arg(long)]
    ratio: Vec<f64>,
    /// SNR in dB, or `none` for noiseless data.
    #[arg(long)]
    snr: Vec<String>,
    #[arg(long)]
    mode: Vec<Method>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print aligned metrics in the summary.
    #[arg(long)]
    align: bool,
    /// Record per-run traces and plotdata.
    #[arg(long)]
    traces: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',', default_value = "250,500,750,1000")]
    kappa3: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    lambda: Vec<f64>,
}

fn parse_snr(s: &str) -> Result<Option<f64>> {
    match s {
        "none" | "inf" | "noiseless" => Ok(None),
        _ => Ok(Some(s.parse().with_context(|| format!("bad snr '{s}'"))?)),
    }
}

impl GridArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let file = self.common.config_file()?;
        let mut spec = file.experiment_spec();
        let solver = self.common.solver(&file);
        if let Some(k) = self.common.iters {
            spec.baseline.iters = k;
        }
        spec.solver = solver;
        if let Some(s) = self.common.seed {
            spec.base_seed = s;
        }
        if !self.image.is_empty() {
            spec.images = self.image.clone();
        }
        if !self.ratio.is_empty() {
            spec.ratios = self.ratio.clone();
        }
        if !self.snr.is_empty() {
            spec.snrs = self.snr.iter().map(|s| parse_snr(s)).collect::<Result<_>>()?;
        }
        if !self.mode.is_empty() {
            spec.methods = self.mode.clone();
        }
        if let Some(r) = self.repeats {
            spec.repeats = r;
        }
        if let Some(t) = self.threads {
            spec.threads = t;
        }
        spec.traces |= self.traces;
        spec.out = Some(self.common.out.clone());
        spec.validate()?;
        Ok(spec)
    }
}

fn summarize(report: &BenchReport, aligned: bool) {
    for r in report.means() {
        let (p, s) = if aligned { (r.psnr_aligned, r.ssim_aligned) } else { (r.psnr, r.ssim) };
        let fmt = |v: Option<f64>, prec: usize| v.map_or("-".to_owned(), |v| format!("{v:.prec$}"));
        println!(
            "{:<24} {:<12} r={:<4} snr={:<5} psnr={} ssim={} [{}]",
            r.image,
            r.mode,
            r.r,
            r.snr.map_or("none".into(), |s| s.to_string()),
            fmt(p, 2),
            fmt(s, 4),
            r.status
        );
    }
}

fn finish(report: &BenchReport, out: &Path, aligned: bool) -> Result<bool> {
    report.write_to(out)?;
    summarize(report, aligned);
    let failed = report.failures();
    if failed > 0 {
        eprintln!("{failed} run(s) failed; see {}", out.join("results.csv").display());
    }
    Ok(failed == 0)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => {
            let truth = load_source(&a.image)?;
            let plan = plan_from_ratio(truth.rows(), truth.cols(), a.ratio)?;
            let seed = a.common.seed.unwrap_or(0);
            let (b, noise) = simulate(&truth, &plan, a.snr, seed)?;
            std::fs::create_dir_all(&a.common.out)?;
            save_image(&truth, a.common.out.join("truth.pgm"))?;
            let sidecar = write_measurements(&b, &plan, &noise, &a.common.out, "measurements")?;
            println!("{}", sidecar.display());
            Ok(true)
        }
        Command::Reconstruct(a) => {
            let file = a.common.config_file()?;
            let mut cfg = a.common.solver(&file);
            let (b, plan, _) = read_measurements(&a.measurements)?;
            let truth = a.image.as_deref().map(load_source).transpose()?;
            std::fs::create_dir_all(&a.common.out)?;
            let method = a.mode.unwrap_or(Method::Solver(cfg.mode));
            let x = match method {
                Method::Solver(mode) => {
                    cfg.mode = mode;
                    let (x, trace) = solve(&b, &plan, &cfg, truth.as_ref())?;
                    let path = a.common.out.join("trace.jsonl");
                    trace.write_jsonl(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
                    let plot = std::fs::File::create(a.common.out.join("plotdata.csv"))?;
                    emit_plotdata(&[(method.to_string(), trace)], plot)?;
                    x
                }
                Method::Hio | Method::Gs => {
                    let kind = if method == Method::Hio { BaselineKind::Hio } else { BaselineKind::Gs };
                    let opts = BaselineOptions {
                        iters: a.common.iters.unwrap_or(1000),
                        seed: cfg.seed,
                        ..Default::default()
                    };
                    best_of_starts(kind, &b, &plan, &opts, 3)?.x
                }
            };
            save_image(&x, a.common.out.join("reconstruction.pgm"))?;
            if let Some(t) = &truth {
                let s = score(&x, t)?;
                println!("psnr={:.3} psnr_aligned={:.3}", s.psnr, s.psnr_aligned);
            }
            Ok(true)
        }
        Command::Evaluate(a) => {
            let truth = load_source(&a.image)?;
            let x = load_image(&a.candidate)?;
            let s = score(&x, &truth)?;
            let (p, q) = if a.align { (s.psnr_aligned, s.ssim_aligned) } else { (s.psnr, s.ssim) };
            println!("{}", serde_json::json!({ "psnr": p, "ssim": q, "aligned": a.align }));
            Ok(true)
        }
        Command::Bench(a) => {
            let spec = a.grid.spec()?;
            let report = run_bench(&spec)?;
            finish(&report, &a.grid.common.out, a.grid.align)
        }
        Command::Sweep(a) => {
            let spec = a.grid.spec()?;
            if a.kappa3.is_empty() || a.lambda.is_empty() {
                bail!("sweep needs --kappa3 and --lambda values");
            }
            let report = run_sweep(&spec, &a.kappa3, &a.lambda)?;
            finish(&report, &a.grid.common.out, a.grid.align)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
