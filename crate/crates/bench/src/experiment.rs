//! Experiment grids: every (image, method, ratio, snr, repeat) cell is an
//! independent job with its own seeds. Rows are sorted before writing so the
//! results file does not depend on scheduling.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ordered_float::OrderedFloat;
use phaseret::forward::{plan_from_ratio, simulate};
use phaseret::metrics::{align, clamp_unit, psnr, ssim};
use phaseret::phantom::{phantom, PhantomKind};
use phaseret::solver::{
    best_of_starts, solve, BaselineKind, BaselineOptions, Mode, SolverConfig, SolverTrace,
};
use phaseret::ImageGrid;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::ExperimentSpec;
use crate::error::{io_err, Error, Result};
use crate::pgm::load_image;
use crate::seeds::{noise_seed, run_seed, snr_label};

/// A reconstruction method: one of the solver modes or a classical baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Solver(Mode),
    Hio,
    Gs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solver(m) => m.name(),
            Self::Hio => "hio",
            Self::Gs => "gs",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hio" => Ok(Self::Hio),
            "gs" => Ok(Self::Gs),
            _ => s
                .parse::<Mode>()
                .map(Self::Solver)
                .map_err(|_| Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where an image comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    Phantom { kind: PhantomKind, rows: usize, cols: usize },
    File(PathBuf),
}

impl ImageSource {
    /// `phantom:<kind>:<n>` or `phantom:<kind>:<rows>x<cols>`; anything else
    /// is a file path.
    pub fn parse(s: &str) -> Result<Self> {
        let Some(rest) = s.strip_prefix("phantom:") else {
            return Ok(Self::File(PathBuf::from(s)));
        };
        let bad = || Error::Config(format!("malformed phantom source '{s}'"));
        let (kind, size) = rest.split_once(':').ok_or_else(bad)?;
        let kind: PhantomKind = kind.parse()?;
        let (rows, cols) = match size.split_once('x') {
            Some((r, c)) => (r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?),
            None => {
                let n = size.parse().map_err(|_| bad())?;
                (n, n)
            }
        };
        if rows == 0 || cols == 0 {
            return Err(bad());
        }
        Ok(Self::Phantom { kind, rows, cols })
    }

    pub fn load(&self) -> Result<ImageGrid> {
        match self {
            Self::Phantom { kind, rows, cols } => Ok(phantom(*kind, *rows, *cols)),
            Self::File(path) => load_image(path),
        }
    }
}

pub fn load_source(s: &str) -> Result<ImageGrid> {
    ImageSource::parse(s)?.load()
}

/// One line of the results file. Metric columns are empty for failed runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub image: String,
    pub mode: String,
    pub r: f64,
    /// Empty for noiseless data.
    pub snr: Option<f64>,
    /// Repeat index, or `mean` for per-cell averages.
    pub repeat: String,
    pub seed: Option<u64>,
    pub noise_seed: Option<u64>,
    pub kappa3: Option<usize>,
    pub lambda: Option<f64>,
    pub iters: usize,
    pub psnr: Option<f64>,
    pub psnr_aligned: Option<f64>,
    pub ssim: Option<f64>,
    pub ssim_aligned: Option<f64>,
    /// `ok`, `failed` (mean rows with no successful member) or `error: …`.
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn is_mean(&self) -> bool {
        self.repeat == "mean"
    }

    fn cell_key(&self) -> CellKey {
        CellKey {
            kappa3: self.kappa3,
            lambda: self.lambda.map(OrderedFloat),
            image: self.image.clone(),
            mode: self.mode.clone(),
            r: OrderedFloat(self.r),
            snr: self.snr.map(OrderedFloat),
        }
    }

    fn repeat_rank(&self) -> (u8, usize) {
        match self.repeat.parse::<usize>() {
            Ok(i) => (0, i),
            Err(_) => (1, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    kappa3: Option<usize>,
    lambda: Option<OrderedFloat<f64>>,
    image: String,
    mode: String,
    r: OrderedFloat<f64>,
    snr: Option<OrderedFloat<f64>>,
}

/// Wall time of one run; kept apart from [`ResultRow`] so the results file
/// is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub image: String,
    pub mode: String,
    pub r: f64,
    pub snr: Option<f64>,
    pub repeat: String,
    pub kappa3: Option<usize>,
    pub lambda: Option<f64>,
    pub time_s: f64,
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub image: String,
    pub method: Method,
    pub ratio: f64,
    pub snr: Option<f64>,
    pub repeat: usize,
}

impl Job {
    /// File-name-safe identifier, also used as the `run` column of plotdata.
    pub fn run_id(&self, cfg: &SolverConfig) -> String {
        let mut id = format!(
            "{}__{}__r{}__snr{}__{}",
            self.image,
            self.method,
            self.ratio,
            snr_label(self.snr),
            self.repeat
        );
        if matches!(self.method, Method::Solver(_)) {
            id = format!("{id}__k{}_l{}", cfg.kappa3, cfg.lambda);
        }
        id.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
    }
}

pub struct RunOutcome {
    pub row: ResultRow,
    pub timing: TimingRow,
    pub trace: Option<(String, SolverTrace)>,
    pub x: Option<ImageGrid>,
}

/// Metrics of `x` (clamped to [0, 1]) against `truth`, plain and aligned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub psnr: f64,
    pub psnr_aligned: f64,
    pub ssim: f64,
    pub ssim_aligned: f64,
}

pub fn score(x: &ImageGrid, truth: &ImageGrid) -> Result<Scores> {
    let x = clamp_unit(x);
    let aligned = align(&x, truth)?.aligned;
    Ok(Scores {
        psnr: psnr(&x, truth)?,
        psnr_aligned: psnr(&aligned, truth)?,
        ssim: ssim(&x, truth)?,
        ssim_aligned: ssim(&aligned, truth)?,
    })
}

fn reconstruct(
    job: &Job,
    spec: &ExperimentSpec,
    truth: &ImageGrid,
    seed: u64,
    nseed: u64,
) -> Result<(ImageGrid, Option<SolverTrace>)> {
    let plan = plan_from_ratio(truth.rows(), truth.cols(), job.ratio)?;
    let (b, _) = simulate(truth, &plan, job.snr, nseed)?;
    match job.method {
        Method::Solver(mode) => {
            let cfg = SolverConfig { mode, seed, ..spec.solver.clone() };
            let (x, trace) = solve(&b, &plan, &cfg, spec.traces.then_some(truth))?;
            Ok((x, Some(trace)))
        }
        Method::Hio | Method::Gs => {
            let kind = if job.method == Method::Hio { BaselineKind::Hio } else { BaselineKind::Gs };
            let opts = BaselineOptions {
                iters: spec.baseline.iters,
                beta: spec.baseline.beta,
                box_constraint: spec.baseline.box_constraint,
                seed,
            };
            Ok((best_of_starts(kind, &b, &plan, &opts, spec.baseline.starts)?.x, None))
        }
    }
}

/// Runs one cell. Failures are reported in the row's status, never as `Err`.
pub fn run_job(job: &Job, spec: &ExperimentSpec, truth: &Result<ImageGrid, String>) -> RunOutcome {
    let seed = run_seed(spec.base_seed, &job.image, job.method.name(), job.ratio, job.snr, job.repeat);
    let nseed = noise_seed(spec.base_seed, &job.image, job.ratio, job.snr, job.repeat);
    let is_solver = matches!(job.method, Method::Solver(_));
    let mut row = ResultRow {
        image: job.image.clone(),
        mode: job.method.name().to_owned(),
        r: job.ratio,
        snr: job.snr,
        repeat: job.repeat.to_string(),
        seed: Some(seed),
        noise_seed: Some(nseed),
        kappa3: is_solver.then_some(spec.solver.kappa3),
        lambda: is_solver.then_some(spec.solver.lambda),
        iters: if is_solver { spec.solver.iters } else { spec.baseline.iters },
        psnr: None,
        psnr_aligned: None,
        ssim: None,
        ssim_aligned: None,
        status: "ok".into(),
    };
    let start = Instant::now();
    let result = truth.as_ref().map_err(|e| Error::Config(e.clone())).and_then(|t| {
        let (x, trace) = reconstruct(job, spec, t, seed, nseed)?;
        let scores = score(&x, t)?;
        Ok((x, trace, scores))
    });
    let time_s = start.elapsed().as_secs_f64();
    let mut trace_out = None;
    let mut x_out = None;
    match result {
        Ok((x, trace, s)) => {
            row.psnr = Some(s.psnr);
            row.psnr_aligned = Some(s.psnr_aligned);
            row.ssim = Some(s.ssim);
            row.ssim_aligned = Some(s.ssim_aligned);
            if spec.traces {
                trace_out = trace.map(|t| (job.run_id(&spec.solver), t));
            }
            x_out = Some(x);
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    let timing = TimingRow {
        image: row.image.clone(),
        mode: row.mode.clone(),
        r: row.r,
        snr: row.snr,
        repeat: row.repeat.clone(),
        kappa3: row.kappa3,
        lambda: row.lambda,
        time_s,
    };
    RunOutcome { row, timing, trace: trace_out, x: x_out }
}

/// Expands the grid in a fixed order: image, method, ratio, snr, repeat.
pub fn expand_jobs(spec: &ExperimentSpec) -> Vec<Job> {
    let mut jobs = Vec::new();
    for image in &spec.images {
        for &method in &spec.methods {
            for &ratio in &spec.ratios {
                for &snr in &spec.snrs {
                    for repeat in 0..spec.repeats {
                        jobs.push(Job { image: image.clone(), method, ratio, snr, repeat });
                    }
                }
            }
        }
    }
    jobs
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    /// Per-run rows followed by one mean row per cell, sorted.
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub traces: Vec<(String, SolverTrace)>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl BenchReport {
    /// Failed per-run rows (mean rows are not counted).
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_mean() && !r.is_ok()).count()
    }

    fn finish(mut self) -> Self {
        self.rows.retain(|r| !r.is_mean());
        let mut cells: BTreeMap<CellKey, Vec<&ResultRow>> = BTreeMap::new();
        for r in &self.rows {
            cells.entry(r.cell_key()).or_default().push(r);
        }
        let means: Vec<ResultRow> = cells
            .into_values()
            .map(|members| {
                let ok: Vec<&ResultRow> = members.iter().copied().filter(|r| r.is_ok()).collect();
                let first = members[0];
                ResultRow {
                    repeat: "mean".into(),
                    seed: None,
                    noise_seed: None,
                    psnr: mean_of(ok.iter().map(|r| r.psnr)),
                    psnr_aligned: mean_of(ok.iter().map(|r| r.psnr_aligned)),
                    ssim: mean_of(ok.iter().map(|r| r.ssim)),
                    ssim_aligned: mean_of(ok.iter().map(|r| r.ssim_aligned)),
                    status: if ok.is_empty() { "failed".into() } else { "ok".into() },
                    ..first.clone()
                }
            })
            .collect();
        self.rows.extend(means);
        self.rows.sort_by(|a, b| a.cell_key().cmp(&b.cell_key()).then(a.repeat_rank().cmp(&b.repeat_rank())));
        self.timings.sort_by(|a, b| {
            (
                a.kappa3,
                a.lambda.map(OrderedFloat),
                &a.image,
                &a.mode,
                OrderedFloat(a.r),
                a.snr.map(OrderedFloat),
            )
                .cmp(&(
                    b.kappa3,
                    b.lambda.map(OrderedFloat),
                    &b.image,
                    &b.mode,
                    OrderedFloat(b.r),
                    b.snr.map(OrderedFloat),
                ))
                .then_with(|| a.repeat.parse::<usize>().ok().cmp(&b.repeat.parse::<usize>().ok()))
        });
        self.traces.sort_by(|a, b| a.0.cmp(&b.0));
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.rows.extend(other.rows);
        self.timings.extend(other.timings);
        self.traces.extend(other.traces);
        self
    }

    /// Mean rows only.
    pub fn means(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_mean())
    }

    pub fn results_csv(&self) -> Result<Vec<u8>> {
        to_csv(&self.rows)
    }

    pub fn timing_csv(&self) -> Result<Vec<u8>> {
        let mut rows = self.timings.clone();
        let mut sums: BTreeMap<CellKey, (TimingRow, f64, usize)> = BTreeMap::new();
        for t in &self.timings {
            let key = CellKey {
                kappa3: t.kappa3,
                lambda: t.lambda.map(OrderedFloat),
                image: t.image.clone(),
                mode: t.mode.clone(),
                r: OrderedFloat(t.r),
                snr: t.snr.map(OrderedFloat),
            };
            let e = sums.entry(key).or_insert_with(|| (t.clone(), 0.0, 0));
            e.1 += t.time_s;
            e.2 += 1;
        }
        rows.extend(sums.into_values().map(|(t, sum, n)| TimingRow {
            repeat: "mean".into(),
            time_s: sum / n as f64,
            ..t
        }));
        to_csv(&rows)
    }

    pub fn plotdata_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        emit_plotdata(&self.traces, &mut out)?;
        Ok(out)
    }

    /// Writes `results.csv`, `timing.csv` and, when traces were recorded,
    /// `traces/<run>.jsonl` plus `plotdata.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_file(&dir.join("results.csv"), &self.results_csv()?)?;
        write_file(&dir.join("timing.csv"), &self.timing_csv()?)?;
        if !self.traces.is_empty() {
            let tdir = dir.join("traces");
            std::fs::create_dir_all(&tdir).map_err(io_err(&tdir))?;
            for (id, trace) in &self.traces {
                let path = tdir.join(format!("{id}.jsonl"));
                let mut buf = Vec::new();
                trace.write_jsonl(&mut buf).map_err(io_err(&path))?;
                write_file(&path, &buf)?;
            }
            write_file(&dir.join("plotdata.csv"), &self.plotdata_csv()?)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

#[derive(Serialize)]
struct PlotRow<'a> {
    run: &'a str,
    k: usize,
    psnr: Option<f64>,
    fidelity: f64,
    tv: f64,
    mu: f64,
    gamma: f64,
    l: usize,
    time_ms: f64,
}

/// Long-format CSV with one row per trace record:
/// `run,k,psnr,fidelity,tv,mu,gamma,l,time_ms`.
pub fn emit_plotdata<W: Write>(traces: &[(String, SolverTrace)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if traces.iter().all(|(_, t)| t.is_empty()) {
        w.write_record(["run", "k", "psnr", "fidelity", "tv", "mu", "gamma", "l", "time_ms"])?;
    }
    for (run, trace) in traces {
        for r in &trace.records {
            w.serialize(PlotRow {
                run,
                k: r.k,
                psnr: r.psnr,
                fidelity: r.fidelity,
                tv: r.tv,
                mu: r.mu,
                gamma: r.gamma,
                l: r.l,
                time_ms: r.time_ms,
            })?;
        }
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn run_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs the full grid of `spec` and appends one mean row per cell.
pub fn run_bench(spec: &ExperimentSpec) -> Result<BenchReport> {
    spec.validate()?;
    let truths: BTreeMap<&str, Result<ImageGrid, String>> =
        spec.images.iter().map(|s| (s.as_str(), load_source(s).map_err(|e| e.to_string()))).collect();
    let jobs = expand_jobs(spec);
    let outcomes: Vec<RunOutcome> = run_pool(spec.threads, || {
        jobs.par_iter().map(|job| run_job(job, spec, &truths[job.image.as_str()])).collect()
    })?;
    let mut report = BenchReport::default();
    for o in outcomes {
        report.rows.push(o.row);
        report.timings.push(o.timing);
        report.traces.extend(o.trace);
    }
    Ok(report.finish())
}

/// [`run_bench`] over every (κ3, λ) pair, combined into one report.
pub fn run_sweep(spec: &ExperimentSpec, kappa3s: &[usize], lambdas: &[f64]) -> Result<BenchReport> {
    if kappa3s.is_empty() || lambdas.is_empty() {
        return Err(Error::Config("sweep needs at least one kappa3 and one lambda".into()));
    }
    let mut report = BenchReport::default();
    for &kappa3 in kappa3s {
        for &lambda in lambdas {
            let mut s = spec.clone();
            s.solver.kappa3 = kappa3;
            s.solver.lambda = lambda;
            report = report.merge(run_bench(&s)?);
        }
    }
    Ok(report.finish())
}
