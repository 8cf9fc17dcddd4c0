use phaseret::forward::{plan_from_ratio, simulate};
use phaseret::phantom::{phantom, PhantomKind};
use phaseret::solver::{weight_schedule, Mode, SolverConfig, SolverTrace};
use phaseret_bench::experiment::{emit_plotdata, ResultRow};
use phaseret_bench::measurements::{read_measurements, write_measurements};
use phaseret_bench::{run_bench, run_sweep, ExperimentSpec, ImageSource, Method};

fn tiny_spec() -> ExperimentSpec {
    ExperimentSpec {
        images: vec!["phantom:shapes:12".into()],
        ratios: vec![2.0],
        snrs: vec![None],
        methods: vec![Method::Solver(Mode::Vanilla), Method::Solver(Mode::Accelerated)],
        repeats: 2,
        solver: SolverConfig {
            iters: 10,
            channels: vec![4, 4, 4],
            kappa1: 5,
            kappa2: 5,
            kappa3: 4,
            lambda: 2.0,
            l0: 2,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn read_rows(bytes: &[u8]) -> Vec<ResultRow> {
    csv::Reader::from_reader(bytes).deserialize().collect::<Result<_, _>>().unwrap()
}

#[test]
fn grid_produces_runs_plus_means() {
    let report = run_bench(&tiny_spec()).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert_eq!(report.means().count(), 2);
    assert_eq!(report.failures(), 0);
    let rows = read_rows(&report.results_csv().unwrap());
    assert_eq!(rows, report.rows);
    let order: Vec<(&str, &str)> = rows.iter().map(|r| (r.mode.as_str(), r.repeat.as_str())).collect();
    assert_eq!(
        order,
        [
            ("accelerated", "0"),
            ("accelerated", "1"),
            ("accelerated", "mean"),
            ("vanilla", "0"),
            ("vanilla", "1"),
            ("vanilla", "mean")
        ]
    );
}

#[test]
fn mean_rows_average_their_members() {
    let mut spec = tiny_spec();
    spec.repeats = 3;
    spec.snrs = vec![Some(25.0)];
    let report = run_bench(&spec).unwrap();
    for mean in report.means() {
        let members: Vec<&ResultRow> =
            report.rows.iter().filter(|r| !r.is_mean() && r.mode == mean.mode).collect();
        assert_eq!(members.len(), 3);
        let fields: [(fn(&ResultRow) -> f64, &str); 4] = [
            (|r| r.psnr.unwrap(), "psnr"),
            (|r| r.psnr_aligned.unwrap(), "psnr_aligned"),
            (|r| r.ssim.unwrap(), "ssim"),
            (|r| r.ssim_aligned.unwrap(), "ssim_aligned"),
        ];
        for (get, name) in fields {
            let expect = members.iter().map(|r| get(r)).sum::<f64>() / 3.0;
            assert!((get(mean) - expect).abs() <= 1e-12, "{name}");
        }
    }
}

#[test]
fn same_seed_gives_identical_csv_across_thread_counts() {
    let spec = tiny_spec();
    let a = run_bench(&spec).unwrap().results_csv().unwrap();
    let b = run_bench(&ExperimentSpec { threads: 3, ..spec.clone() }).unwrap().results_csv().unwrap();
    assert_eq!(a, b);
    let c = run_bench(&ExperimentSpec { base_seed: 1, ..spec }).unwrap().results_csv().unwrap();
    assert_ne!(a, c);
}

#[test]
fn every_row_is_reproducible_from_its_seed() {
    let spec = tiny_spec();
    let report = run_bench(&spec).unwrap();
    let row = report.rows.iter().find(|r| r.mode == "vanilla" && r.repeat == "1").unwrap();
    let truth = phantom(PhantomKind::Shapes, 12, 12);
    let plan = plan_from_ratio(12, 12, row.r).unwrap();
    let (b, _) = simulate(&truth, &plan, row.snr, row.noise_seed.unwrap()).unwrap();
    let cfg = SolverConfig { mode: Mode::Vanilla, seed: row.seed.unwrap(), ..spec.solver };
    let (x, _) = phaseret::solver::solve(&b, &plan, &cfg, None).unwrap();
    let s = phaseret_bench::experiment::score(&x, &truth).unwrap();
    assert_eq!(s.psnr.to_bits(), row.psnr.unwrap().to_bits());
}

#[test]
fn traces_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = tiny_spec();
    spec.repeats = 1;
    spec.methods = vec![Method::Solver(Mode::Accelerated), Method::Hio];
    spec.baseline.iters = 20;
    spec.traces = true;
    let report = run_bench(&spec).unwrap();
    report.write_to(dir.path()).unwrap();
    let tdir = dir.path().join("traces");
    let files: Vec<_> = std::fs::read_dir(&tdir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1, "baselines have no trace");
    let text = std::fs::read(&files[0]).unwrap();
    let trace = SolverTrace::read_jsonl(&text[..]).unwrap();
    assert_eq!(trace.len(), spec.solver.iters + 1);
    assert!(trace.records.iter().all(|r| r.psnr.is_some()));

    let plot = std::fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    let mut lines = plot.lines();
    assert_eq!(lines.next().unwrap(), "run,k,psnr,fidelity,tv,mu,gamma,l,time_ms");
    assert_eq!(lines.count(), spec.solver.iters + 1);
    let mut rd = csv::Reader::from_reader(plot.as_bytes());
    for rec in rd.records() {
        let rec = rec.unwrap();
        let k: usize = rec[1].parse().unwrap();
        let mu: f64 = rec[5].parse().unwrap();
        assert_eq!(mu, weight_schedule(k, &spec.solver));
    }
}

#[test]
fn plotdata_of_a_single_trace() {
    let truth = phantom(PhantomKind::Blobs, 8, 8);
    let plan = plan_from_ratio(8, 8, 2.0).unwrap();
    let (b, _) = simulate(&truth, &plan, None, 0).unwrap();
    let cfg = SolverConfig { mode: Mode::TvOnly, iters: 10, ..Default::default() };
    let (_, trace) = phaseret::solver::solve(&b, &plan, &cfg, None).unwrap();
    let mut out = Vec::new();
    emit_plotdata(&[("one".into(), trace)], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().nth(1).unwrap().starts_with("one,0,,"));
}

#[test]
fn sweep_covers_every_pair() {
    let mut spec = tiny_spec();
    spec.repeats = 1;
    spec.methods = vec![Method::Solver(Mode::Accelerated)];
    let report = run_sweep(&spec, &[2, 8], &[1.0, 3.0]).unwrap();
    let means: Vec<(usize, f64)> = report.means().map(|r| (r.kappa3.unwrap(), r.lambda.unwrap())).collect();
    assert_eq!(means, vec![(2, 1.0), (2, 3.0), (8, 1.0), (8, 3.0)]);
    assert_eq!(report.rows.len(), 8);
}

#[test]
fn failures_are_recorded_per_row() {
    let mut spec = tiny_spec();
    spec.images.push("/no/such/image.pgm".into());
    spec.repeats = 1;
    let report = run_bench(&spec).unwrap();
    assert_eq!(report.failures(), 2);
    let bad: Vec<&ResultRow> = report.rows.iter().filter(|r| r.image.starts_with('/')).collect();
    assert!(bad.iter().all(|r| r.psnr.is_none()));
    assert!(bad.iter().filter(|r| r.is_mean()).all(|r| r.status == "failed"));
    assert!(bad.iter().filter(|r| !r.is_mean()).all(|r| r.status.starts_with("error:")));
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(run_bench(&ExperimentSpec { repeats: 0, ..tiny_spec() }).is_err());
    assert!(run_bench(&ExperimentSpec { ratios: vec![0.5], ..tiny_spec() }).is_err());
    assert!(run_bench(&ExperimentSpec { methods: vec![], ..tiny_spec() }).is_err());
}

#[test]
fn image_sources() {
    assert_eq!(
        ImageSource::parse("phantom:grating:8x5").unwrap(),
        ImageSource::Phantom { kind: PhantomKind::Grating, rows: 8, cols: 5 }
    );
    assert_eq!(ImageSource::parse("phantom:mixed:7").unwrap().load().unwrap().dims(), (7, 7));
    assert!(ImageSource::parse("phantom:nope:8").is_err());
    assert!(ImageSource::parse("phantom:blobs:0").is_err());
    assert!(matches!(ImageSource::parse("a/b.pgm").unwrap(), ImageSource::File(_)));
    assert_eq!("hio".parse::<Method>().unwrap(), Method::Hio);
    assert_eq!("dd_only".parse::<Method>().unwrap(), Method::Solver(Mode::DdOnly));
    assert!("xyz".parse::<Method>().is_err());
}

#[test]
fn measurements_roundtrip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(PhantomKind::Mixed, 10, 7);
    let plan = plan_from_ratio(10, 7, 1.7).unwrap();
    let (b, noise) = simulate(&truth, &plan, Some(20.0), 9).unwrap();
    let sidecar = write_measurements(&b, &plan, &noise, dir.path(), "m").unwrap();
    let (b2, plan2, meta) = read_measurements(&sidecar).unwrap();
    assert_eq!(b2, b);
    assert_eq!(plan2, plan);
    assert_eq!(meta.snr, Some(20.0));
    assert_eq!(meta.sigma.to_bits(), noise.sigma.to_bits());
    assert_eq!(meta.seed, 9);

    std::fs::write(dir.path().join("m.f64"), [0u8; 12]).unwrap();
    assert!(read_measurements(&sidecar).is_err());
}
