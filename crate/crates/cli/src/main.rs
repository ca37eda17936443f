//! `fcp`: change points in production frontiers from the command line.
//!
//! Every subcommand accepts `--config FILE` with `key=value` lines; those
//! values are applied first and explicit flags override them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Args, Parser, Subcommand, ValueEnum};
use frontier_cpd::eval::parse_external;
use frontier_cpd::io::{read_series_file, write_frontier, write_json, write_scores, write_series};
use frontier_cpd::{
    a_n_from_side, change_interval, compute_scores, default_lambda, detect_multi,
    detect_multi_local, detect_multi_robust, generate, run_benchmark, table_row, trim_quantile,
    BenchmarkPlan, CiMode, CiSettings, DetectionResult64, DetectorConfig64, DetectorSpec, FcpError,
    Frontier, FrontierEstimate, FrontierFamily, FrontierKind, FrontierSpec, ScoreDist,
    ScoreSeries64, Series64, SimConfig, TechnologyPath, TrimBox,
};
use serde_json::json;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "fcp",
    version,
    about = "Change-point detection in nonparametric production frontiers"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Global change points (left-expanding search, or the robust variant).
    Detect {
        #[command(flatten)]
        det: DetectArgs,
        #[arg(long)]
        robust: bool,
    },
    /// Change points confined to cells of a dyadic grid over the inputs.
    DetectLocal {
        #[command(flatten)]
        det: DetectArgs,
        /// Side cap `A_n^(1/d)` of the finest cell count per axis.
        #[arg(long, default_value_t = 4.0)]
        an_side: f64,
    },
    /// Detection followed by a confidence interval for every change.
    Ci {
        #[command(flatten)]
        det: DetectArgs,
        #[arg(long)]
        robust: bool,
        #[arg(long, value_enum, default_value_t = Mode::Iid)]
        mode: Mode,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
    },
    /// Draw a synthetic series and its ground truth.
    Simulate(SimulateArgs),
    /// Monte-Carlo accuracy of a detector on a reference design.
    Benchmark(BenchmarkArgs),
    /// Per-segment frontier staircases and efficiency scores.
    Frontier(FrontierArgs),
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Series CSV with header `t,x1,...,xd,y`.
    #[arg(long)]
    input: PathBuf,
    /// Result file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug, Clone)]
struct Tuning {
    /// Threshold, or `auto` for `ln(n)^2`.
    #[arg(long, default_value = "auto")]
    lambda: Lambda,
    /// Quantile level of the trimming box.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Skip the local refitting pass.
    #[arg(long)]
    no_refit: bool,
    #[arg(long, default_value_t = 2)]
    min_seg: usize,
    /// Back-off constant of the robust restart.
    #[arg(long, default_value_t = 1.0)]
    robust_c: f64,
    /// Use the order-q quantile hull instead of the full hull.
    #[arg(long)]
    quantile: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
enum Lambda {
    Auto,
    Fixed(f64),
}

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Lambda::Auto);
        }
        s.parse()
            .map(Lambda::Fixed)
            .map_err(|_| format!("expected a number or 'auto', got '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Iid,
    General,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// constant, additive, cobbdouglas, logistic, piecewiselinear or local.
    #[arg(long)]
    model: String,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// r1, r2, r3 or r4.
    #[arg(long)]
    scores: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.75)]
    multiplier: f64,
    /// Series CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Ground-truth JSON; defaults to `truth.json` beside `--output`.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// t2, t3 or t4.
    #[arg(long)]
    table: String,
    /// Row such as `K2,R1,Constant,d1`.
    #[arg(long)]
    row: String,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    jobs: Option<usize>,
    /// Detector; the table's own when absent.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Change lists of an external detector, one line per replication.
    #[arg(long)]
    external: Option<PathBuf>,
    #[arg(long, default_value_t = 4.0)]
    an_side: f64,
    /// Record wall time per replication (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-replication JSONL.
    #[arg(long)]
    records: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Fcp,
    FcpRobust,
    MsFcp,
    Oracle,
    Empty,
    External,
}

#[derive(Args, Debug)]
struct FrontierArgs {
    #[arg(long)]
    input: PathBuf,
    /// Segment files are written to `<prefix>_segment<k>.csv`.
    #[arg(long)]
    prefix: PathBuf,
    /// Comma-separated change locations; detected when absent.
    #[arg(long)]
    changepoints: Option<String>,
    /// Score CSV `t,r_hat,active` against each observation's own segment.
    #[arg(long)]
    scores_out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug)]
enum Failure {
    Validation { kind: &'static str, message: String },
    Internal(String),
}

impl From<FcpError> for Failure {
    fn from(e: FcpError) -> Self {
        if e.is_validation() {
            Failure::Validation {
                kind: error_kind(&e),
                message: e.to_string(),
            }
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Validation {
        kind: "InvalidParameter",
        message: message.into(),
    }
}

fn error_kind(e: &FcpError) -> &'static str {
    match e {
        FcpError::EmptyInput => "EmptyInput",
        FcpError::DimensionMismatch { .. } => "DimensionMismatch",
        FcpError::NegativeValue { .. } => "NegativeValue",
        FcpError::NonFinite { .. } => "NonFinite",
        FcpError::TooFewObservations { .. } => "TooFewObservations",
        FcpError::IndexOutOfRange { .. } => "IndexOutOfRange",
        FcpError::SegmentTooShort { .. } => "SegmentTooShort",
        FcpError::NoActiveEvaluationPoints => "NoActiveEvaluationPoints",
        FcpError::InsufficientData(_) => "InsufficientData",
        FcpError::InvalidParameter(_) => "InvalidParameter",
        FcpError::Parse(_) | FcpError::Csv(_) | FcpError::Json(_) => "Parse",
        FcpError::Io(_) => "Io",
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let argv = match with_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(f) => return report(f),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string().trim().to_string();
            return report(Failure::Validation {
                kind: "Usage",
                message,
            });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let (code, body) = match f {
        Failure::Validation { kind, message } => (
            2,
            json!({"error": "validation", "kind": kind, "message": message}),
        ),
        Failure::Internal(message) => (1, json!({"error": "internal", "message": message})),
    };
    eprintln!("{body}");
    ExitCode::from(code)
}

/// Splices `--key value` pairs from `--config FILE` in right after the
/// subcommand so that flags given on the command line take precedence.
fn with_config(argv: Vec<std::ffi::OsString>) -> Result<Vec<std::ffi::OsString>, Failure> {
    let args: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            path = Some(
                args.get(i + 1)
                    .cloned()
                    .ok_or_else(|| invalid("--config needs a file"))?,
            );
            i += 2;
            continue;
        }
        if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(args[i].clone());
        }
        i += 1;
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path)
        .map_err(|e| invalid(format!("cannot read config '{path}': {e}")))?;
    let mut injected = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("{path}:{}: expected key=value", no + 1)))?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        match value.trim() {
            "true" => injected.push(flag),
            "false" => {}
            v => {
                injected.push(flag);
                injected.push(v.to_string());
            }
        }
    }
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(rest.len(), |p| p + 2);
    rest.splice(at..at, injected);
    Ok(rest.into_iter().map(Into::into).collect())
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Detect { det, robust } => {
            let (_, result) = detect(&det, robust)?;
            emit(det.output.as_deref(), |w| write_json(&result, w))
        }
        Command::DetectLocal { det, an_side } => {
            let series = load(&det.input)?;
            let config = detector_config(&det.tuning, series.n())?;
            if !(an_side >= 1.0) {
                return Err(invalid(format!("--an-side must be >= 1, got {an_side}")));
            }
            let result = detect_multi_local(&series, &config, a_n_from_side(an_side, series.d()))?;
            emit(det.output.as_deref(), |w| write_json(&result, w))
        }
        Command::Ci {
            det,
            robust,
            mode,
            level,
        } => {
            if !(level > 0.0 && level < 1.0) {
                return Err(invalid(format!("--level must lie in (0, 1), got {level}")));
            }
            let (series, detection) = detect(&det, robust)?;
            let x0 = TrimBox::new(detection.x0.clone())?;
            let settings = CiSettings {
                level,
                mode: match mode {
                    Mode::Iid => CiMode::Iid,
                    Mode::General => CiMode::General,
                },
                min_seg: det.tuning.min_seg,
                bandwidths: None,
            };
            let intervals = detection
                .changepoints
                .iter()
                .zip(&detection.refit_windows)
                .map(|(&eta, &window)| change_interval(&series, eta, window, &x0, &settings))
                .collect::<Result<Vec<_>, _>>()?;
            let body = json!({ "detection": detection, "intervals": intervals });
            emit(det.output.as_deref(), |w| write_json(&body, w))
        }
        Command::Simulate(args) => simulate(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Frontier(args) => frontier(args),
    }
}

fn load(path: &Path) -> Result<Series64, Failure> {
    if !path.is_file() {
        return Err(Failure::Validation {
            kind: "Io",
            message: format!("input file '{}' not found", path.display()),
        });
    }
    Ok(read_series_file(path)?)
}

fn detector_config(t: &Tuning, n: usize) -> Result<DetectorConfig64, Failure> {
    let config = DetectorConfig64 {
        lambda: match t.lambda {
            Lambda::Auto => default_lambda(n),
            Lambda::Fixed(v) => v,
        },
        alpha_trim: t.alpha,
        refit: !t.no_refit,
        robust_c: t.robust_c,
        min_seg: t.min_seg,
        frontier: t.quantile.map_or(FrontierKind::Fdh, FrontierKind::Quantile),
    };
    config.validate()?;
    Ok(config)
}

fn detect(det: &DetectArgs, robust: bool) -> Result<(Series64, DetectionResult64), Failure> {
    let series = load(&det.input)?;
    let config = detector_config(&det.tuning, series.n())?;
    let result = if robust {
        detect_multi_robust(&series, &config)?
    } else {
        detect_multi(&series, &config)?
    };
    Ok((series, result))
}

/// Runs `body` against the file at `path`, or stdout.
fn emit(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> frontier_cpd::Result<()>,
) -> Outcome {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            body(&mut w)?;
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Outcome {
    let path = if args.model.trim().eq_ignore_ascii_case("local") {
        TechnologyPath::local_table1(args.d)?
    } else {
        TechnologyPath::Global(FrontierSpec::table1(
            args.model.parse::<FrontierFamily>()?,
            args.d,
        )?)
    };
    let scores: ScoreDist = args.scores.parse()?;
    let mut config = SimConfig::new(args.n, args.d, args.k, path, scores, args.seed);
    config.change_multiplier = args.multiplier;
    let (series, truth) = generate::<f64>(&config)?;
    emit(args.output.as_deref(), |w| write_series(&series, w))?;
    let truth_path = args
        .truth
        .or_else(|| args.output.as_ref().map(|o| o.with_file_name("truth.json")));
    if let Some(p) = truth_path {
        let body = json!({ "config": config, "truth": truth });
        emit(Some(&p), |w| write_json(&body, w))?;
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Outcome {
    let (sim, default_detector) = table_row(&args.table, &args.row, args.n)?;
    let method = match (args.method, &args.external) {
        (Some(Method::External) | None, Some(_)) => Method::External,
        (Some(Method::External), None) => {
            return Err(invalid("--method external needs --external FILE"))
        }
        (Some(m), Some(_)) => {
            return Err(invalid(format!("--external conflicts with --method {m:?}")))
        }
        (Some(m), None) => m,
        (None, None) => match default_detector {
            DetectorSpec::MsFcp { .. } => Method::MsFcp,
            _ => Method::Fcp,
        },
    };
    let detector = match method {
        Method::Fcp => DetectorSpec::Fcp,
        Method::FcpRobust => DetectorSpec::FcpRobust,
        Method::MsFcp => {
            if !(args.an_side >= 1.0) {
                return Err(invalid(format!(
                    "--an-side must be >= 1, got {}",
                    args.an_side
                )));
            }
            DetectorSpec::MsFcp {
                an_side: args.an_side,
            }
        }
        Method::Oracle => DetectorSpec::Oracle,
        Method::Empty => DetectorSpec::Empty,
        Method::External => {
            let p = args.external.as_deref().expect("checked above");
            let text = fs::read_to_string(p).map_err(|e| Failure::Validation {
                kind: "Io",
                message: format!("{}: {e}", p.display()),
            })?;
            DetectorSpec::External(parse_external(&text)?)
        }
    };
    if args.jobs == Some(0) {
        return Err(invalid("--jobs must be >= 1"));
    }
    let plan = BenchmarkPlan {
        setup: args.row.clone(),
        config: Some(detector_config(&args.tuning, sim.n)?),
        sim,
        detector,
        reps: args.reps,
        master_seed: args.seed,
        jobs: args.jobs,
        timings: args.timings,
    };
    let summary = run_benchmark(&plan)?;
    emit(args.output.as_deref(), |w| summary.write_csv(w))?;
    if let Some(p) = args.records.as_deref() {
        emit(Some(p), |w| summary.write_jsonl(w))?;
    }
    Ok(())
}

fn frontier(args: FrontierArgs) -> Outcome {
    let series = load(&args.input)?;
    let n = series.n();
    let config = detector_config(&args.tuning, n)?;
    let changes: Vec<usize> = match &args.changepoints {
        Some(text) => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| invalid(format!("bad change location '{s}'")))
            })
            .collect::<Result<_, _>>()?,
        None => detect_multi(&series, &config)?.changepoints,
    };
    if changes.windows(2).any(|w| w[0] >= w[1]) || changes.iter().any(|&c| c < 1 || c >= n) {
        return Err(invalid(format!(
            "change locations must be increasing and lie in 1..{n}"
        )));
    }
    let x0 = trim_quantile(&series, config.alpha_trim)?;
    let mut bounds = vec![0];
    bounds.extend(&changes);
    bounds.push(n);
    let mut scores = ScoreSeries64 {
        r_hat: Vec::new(),
        active: Vec::new(),
        x0: x0.clone(),
        zero_frontier: 0,
    };
    let mut files = Vec::new();
    for (k, w) in bounds.windows(2).enumerate() {
        let segment = series.window(w[0] + 1, w[1])?;
        let fit = FrontierEstimate::fit(segment.obs())?;
        let file = segment_path(&args.prefix, k + 1);
        emit(Some(&file), |out| write_frontier(&fit, out))?;
        let part = compute_scores(
            &segment,
            &Frontier::fit(config.frontier, segment.obs())?,
            &x0,
        )?;
        scores.r_hat.extend(part.r_hat);
        scores.active.extend(part.active);
        scores.zero_frontier += part.zero_frontier;
        files.push(json!({ "segment": k + 1, "start": w[0] + 1, "end": w[1], "file": file.display().to_string() }));
    }
    if let Some(p) = args.scores_out.as_deref() {
        emit(Some(p), |w| write_scores(&scores, w))?;
    }
    let body = json!({ "changepoints": changes, "x0": x0.x0, "segments": files });
    emit(None, |w| write_json(&body, w))
}

fn segment_path(prefix: &Path, k: usize) -> PathBuf {
    let name = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    prefix.with_file_name(format!("{name}_segment{k}.csv"))
}
