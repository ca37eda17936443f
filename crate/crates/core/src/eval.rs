//! Accuracy metrics and Monte-Carlo benchmark runs.

use crate::error::{FcpError, Result};
use crate::global::{detect_multi, detect_multi_robust};
use crate::grid::a_n_from_side;
use crate::local::detect_multi_local;
use crate::model::DetectorConfig;
use crate::sim::{
    derive_seed, generate, FrontierFamily, FrontierSpec, ScoreDist, SimConfig, TechnologyPath,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// Hausdorff distance between two sets of change locations. Two empty sets
/// are at distance 0; an empty and a nonempty set are at distance `n`.
pub fn hausdorff(a: &[usize], b: &[usize], n: usize) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => n as f64,
        _ => directed(a, b).max(directed(b, a)) as f64,
    }
}

fn directed(a: &[usize], b: &[usize]) -> usize {
    a.iter()
        .map(|&x| b.iter().map(|&y| x.abs_diff(y)).min().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// Which detector a benchmark runs on every replication.
#[derive(Clone, Debug, PartialEq)]
pub enum DetectorSpec {
    Fcp,
    FcpRobust,
    /// Multi-scale local detector with `A_n^(1/d)` fixed to `an_side`.
    MsFcp {
        an_side: f64,
    },
    /// Returns the true change points.
    Oracle,
    /// Never reports a change.
    Empty,
    /// Precomputed change lists, one per replication.
    External(Vec<Vec<usize>>),
}

impl DetectorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorSpec::Fcp => "FCP",
            DetectorSpec::FcpRobust => "FCP-robust",
            DetectorSpec::MsFcp { .. } => "MS-FCP",
            DetectorSpec::Oracle => "oracle",
            DetectorSpec::Empty => "empty",
            DetectorSpec::External(_) => "external",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub rep: usize,
    pub seed: u64,
    pub d_h: f64,
    pub k_err: usize,
    pub k_hat: usize,
    pub changepoints: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A benchmark: simulation design, detector and replication settings.
#[derive(Clone, Debug)]
pub struct BenchmarkPlan {
    pub setup: String,
    pub sim: SimConfig,
    pub detector: DetectorSpec,
    /// `None` uses [`DetectorConfig::defaults_for`] with the series length.
    pub config: Option<DetectorConfig<f64>>,
    pub reps: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Record per-replication wall time (makes output nondeterministic).
    pub timings: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub setup: String,
    pub method: String,
    pub reps: usize,
    /// Replications whose detector failed; excluded from the means.
    pub failures: usize,
    pub d_h_mean: f64,
    pub k_err_mean: f64,
    #[serde(skip)]
    pub records: Vec<EvalRecord>,
}

impl BenchmarkSummary {
    pub fn from_records(setup: &str, method: &str, records: Vec<EvalRecord>) -> Self {
        let ok: Vec<&EvalRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let m = ok.len().max(1) as f64;
        let (d_h_mean, k_err_mean) = if ok.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (
                ok.iter().map(|r| r.d_h).sum::<f64>() / m,
                ok.iter().map(|r| r.k_err as f64).sum::<f64>() / m,
            )
        };
        Self {
            setup: setup.to_string(),
            method: method.to_string(),
            reps: records.len(),
            failures: records.len() - ok.len(),
            d_h_mean,
            k_err_mean,
            records,
        }
    }

    /// `setup,method,d_h_mean,k_err_mean` header plus one row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["setup", "method", "d_h_mean", "k_err_mean"])?;
        w.write_record([
            self.setup.clone(),
            self.method.clone(),
            format!("{:.4}", self.d_h_mean),
            format!("{:.4}", self.k_err_mean),
        ])?;
        w.flush()?;
        Ok(())
    }

    /// One JSON object per replication, in replication order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs one replication: simulate with its derived seed, detect, score.
pub fn run_rep(plan: &BenchmarkPlan, rep: usize) -> EvalRecord {
    let seed = derive_seed(plan.master_seed, rep as u64);
    let start = Instant::now();
    let sim = plan.sim.with_seed(seed);
    let truth_cps = sim.changepoints();
    let found = detect_rep(plan, &sim, rep);
    let runtime_ms = plan.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    match found {
        Ok(cps) => EvalRecord {
            rep,
            seed,
            d_h: hausdorff(&truth_cps, &cps, sim.n),
            k_err: truth_cps.len().abs_diff(cps.len()),
            k_hat: cps.len(),
            changepoints: cps,
            runtime_ms,
            error: None,
        },
        Err(e) => EvalRecord {
            rep,
            seed,
            d_h: f64::NAN,
            k_err: 0,
            k_hat: 0,
            changepoints: Vec::new(),
            runtime_ms,
            error: Some(e.to_string()),
        },
    }
}

fn detect_rep(plan: &BenchmarkPlan, sim: &SimConfig, rep: usize) -> Result<Vec<usize>> {
    match &plan.detector {
        DetectorSpec::Oracle => return Ok(sim.changepoints()),
        DetectorSpec::Empty => return Ok(Vec::new()),
        DetectorSpec::External(lists) => {
            return lists.get(rep).cloned().ok_or_else(|| {
                FcpError::InsufficientData(format!("no external result for replication {rep}"))
            })
        }
        _ => {}
    }
    let (series, _) = generate::<f64>(sim)?;
    let config = plan
        .config
        .clone()
        .unwrap_or_else(|| DetectorConfig::defaults_for(series.n()));
    let result = match &plan.detector {
        DetectorSpec::Fcp => detect_multi(&series, &config)?,
        DetectorSpec::FcpRobust => detect_multi_robust(&series, &config)?,
        DetectorSpec::MsFcp { an_side } => {
            detect_multi_local(&series, &config, a_n_from_side(*an_side, series.d()))?
        }
        _ => unreachable!("handled above"),
    };
    Ok(result.changepoints)
}

/// Runs every replication (in parallel) and aggregates. Output order and
/// values depend only on the plan.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkSummary> {
    if plan.reps == 0 {
        return Err(FcpError::InvalidParameter("reps must be >= 1".into()));
    }
    plan.sim.validate()?;
    if let Some(c) = &plan.config {
        c.validate()?;
    }
    let body = || {
        (0..plan.reps)
            .into_par_iter()
            .map(|rep| run_rep(plan, rep))
            .collect::<Vec<_>>()
    };
    let records = match plan.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| FcpError::InvalidParameter(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    };
    Ok(BenchmarkSummary::from_records(
        &plan.setup,
        plan.detector.name(),
        records,
    ))
}

/// Simulation design and default detector for a named table row such as
/// `t2` / `K2,R1,Constant,d1`. Table `t4` uses the local technology path.
pub fn table_row(table: &str, row: &str, n: usize) -> Result<(SimConfig, DetectorSpec)> {
    let parts: Vec<&str> = row.split(',').map(str::trim).collect();
    let [k, r, model, d] = parts[..] else {
        return Err(FcpError::Parse(format!(
            "row must look like 'K2,R1,Constant,d1', got '{row}'"
        )));
    };
    let k: usize = strip_prefix_ci(k, 'k')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FcpError::Parse(format!("bad change count '{k}'")))?;
    let d: usize = strip_prefix_ci(d, 'd')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FcpError::Parse(format!("bad dimension '{d}'")))?;
    let scores: ScoreDist = r.parse()?;
    let table = table.trim().to_ascii_lowercase();
    let (path, detector) = match table.as_str() {
        "t2" | "t3" => {
            let want = if table == "t2" { 1 } else { 2 };
            if d != want {
                return Err(FcpError::InvalidParameter(format!(
                    "table {table} has d = {want}, got d = {d}"
                )));
            }
            let family: FrontierFamily = model.parse()?;
            (
                TechnologyPath::Global(FrontierSpec::table1(family, d)?),
                DetectorSpec::Fcp,
            )
        }
        "t4" => (
            TechnologyPath::local_table1(d)?,
            DetectorSpec::MsFcp { an_side: 4.0 },
        ),
        _ => {
            return Err(FcpError::InvalidParameter(format!(
                "unknown table '{table}' (t2, t3, t4)"
            )))
        }
    };
    Ok((SimConfig::new(n, d, k, path, scores, 0), detector))
}

fn strip_prefix_ci(s: &str, c: char) -> Option<&str> {
    s.strip_prefix(c)
        .or_else(|| s.strip_prefix(c.to_ascii_uppercase()))
}

/// One change list per line, comma or whitespace separated; blank lines are
/// empty lists.
pub fn parse_external(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .map(|line| {
            line.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| FcpError::Parse(format!("bad change location '{s}'")))
                })
                .collect()
        })
        .collect()
}
