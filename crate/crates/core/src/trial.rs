//! Trial orchestration and reporting.
//!
//! Trial `i` runs with seed `derive_seed(base_seed, i)`, so results do not depend on how
//! trials are spread over workers. Records are merged in trial-index order.

use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analyzer::{
    check_edcs, classify_lucky, dichotomy_for_run, late_maximum_matching, path_census, phase_map, run_measures,
    DichotomyReport, RunMeasures,
};
use crate::augmenter::{beats23_match, greedy_match, soundness_violations};
use crate::graph::{Graph, GraphError};
use crate::instances::{gen_random, GenSpec, InstanceError};
use crate::oracle::max_matching;
use crate::sparsifier::{bernstein_match, AlgoParams, SparsifierError};
use crate::stream::{derive_seed, make_stream, rng_for, PhaseSplit, StreamError, PHASE_SUBSTREAM};
use crate::TrialDiagnostics;

/// Environment variable that sets the worker count when the config leaves it open.
pub const THREADS_ENV: &str = "MATCH_BENCH_THREADS";

#[derive(Debug, Error)]
pub enum TrialError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Sparsifier(#[from] SparsifierError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Greedy,
    Bernstein,
    Beats23,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "bernstein" => Ok(Algorithm::Bernstein),
            "beats23" => Ok(Algorithm::Beats23),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceSpec {
    /// One fixed graph; only the stream order changes between trials.
    File(PathBuf),
    /// A fresh graph per trial, generated from the trial seed.
    Generated(GenSpec),
}

/// Which structural checks to run on each trial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub edcs: bool,
    /// One dichotomy evaluation per δ.
    pub dichotomy: Vec<f64>,
    pub census: bool,
}

impl std::str::FromStr for Checks {
    type Err = String;

    /// Parses a comma list such as `edcs,dichotomy:0.1,census`.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut c = Checks::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item.split_once(':') {
                None if item == "edcs" => c.edcs = true,
                None if item == "census" => c.census = true,
                Some(("dichotomy", ds)) => {
                    for d in ds.split(':') {
                        c.dichotomy.push(d.parse().map_err(|_| format!("bad delta {d:?}"))?);
                    }
                }
                _ => return Err(format!("unknown check {item:?}")),
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub algo: Algorithm,
    pub instance: InstanceSpec,
    pub params: AlgoParams,
    pub trials: usize,
    pub base_seed: u64,
    pub checks: Checks,
    /// Worker count; `None` falls back to the environment, then to the core count.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), TrialError> {
        if self.trials == 0 {
            return Err(TrialError::Config("trial count must be at least 1".into()));
        }
        if let Some(d) = self.checks.dichotomy.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return Err(TrialError::Config(format!("delta {d} outside (0, 1)")));
        }
        if self.threads == Some(0) {
            return Err(TrialError::Config("threads must be at least 1".into()));
        }
        self.params.validate().map_err(|e| TrialError::Config(e.to_string()))
    }

    fn worker_count(&self) -> usize {
        self.threads
            .or_else(|| std::env::var(THREADS_ENV).ok()?.parse().ok().filter(|&t| t > 0))
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdcsOutcome {
    pub passed: bool,
    pub not_in_g: usize,
    pub degree_violations: usize,
    pub missing_u: usize,
    pub extra_u: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusOutcome {
    pub m_star: usize,
    pub m_h: usize,
    pub paths: usize,
    pub by_length: [usize; 3],
    pub lucky: usize,
    pub observation_holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcomes {
    pub edcs: Option<EdcsOutcome>,
    pub dichotomy: Vec<DichotomyReport>,
    pub census: Option<CensusOutcome>,
    /// Augmentation soundness violations; always checked for the augmentation algorithm.
    pub soundness: Option<Vec<String>>,
}

impl CheckOutcomes {
    pub fn passed(&self) -> bool {
        self.edcs.as_ref().is_none_or(|e| e.passed)
            && self.dichotomy.iter().all(DichotomyReport::holds)
            && self.census.as_ref().is_none_or(|c| c.observation_holds)
            && self.soundness.as_ref().is_none_or(Vec::is_empty)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub output_size: usize,
    pub mu_g: usize,
    /// `output_size / mu_g`, or 1 when the graph has no edges to match.
    pub ratio: f64,
    pub h_size: Option<usize>,
    pub u_size: Option<usize>,
    pub t_size: Option<usize>,
    pub m_h_size: Option<usize>,
    pub m_size: Option<usize>,
    pub mu_hu: Option<usize>,
    /// Applied augmentations of length 1, 3 and 5.
    pub path_histogram: Option<[usize; 3]>,
    pub checks: CheckOutcomes,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Standard error of the mean ratio.
    pub stderr_ratio: f64,
    pub mean_output: f64,
    pub mean_mu_g: f64,
    pub checks_passed: bool,
}

impl Aggregate {
    pub fn from_records(records: &[TrialRecord]) -> Option<Aggregate> {
        if records.is_empty() {
            return None;
        }
        let n = records.len() as f64;
        let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
        let mean = ratios.iter().sum::<f64>() / n;
        let var = if records.len() > 1 {
            ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Aggregate {
            trials: records.len(),
            mean_ratio: mean,
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            stderr_ratio: (var / n).sqrt(),
            mean_output: records.iter().map(|r| r.output_size as f64).sum::<f64>() / n,
            mean_mu_g: records.iter().map(|r| r.mu_g as f64).sum::<f64>() / n,
            checks_passed: records.iter().all(|r| r.checks.passed()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub algo: Algorithm,
    pub instance: InstanceSpec,
    pub params: AlgoParams,
    pub base_seed: u64,
    pub checks: Checks,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

impl TrialReport {
    pub fn from_records(config: &TrialConfig, records: Vec<TrialRecord>) -> Result<Self, TrialError> {
        let aggregate = Aggregate::from_records(&records)
            .ok_or_else(|| TrialError::Config("a report needs at least one trial".into()))?;
        Ok(TrialReport {
            algo: config.algo,
            instance: config.instance.clone(),
            params: config.params.clone(),
            base_seed: config.base_seed,
            checks: config.checks.clone(),
            records,
            aggregate,
        })
    }

    /// SHA-256 of the JSON report with every wall-time field zeroed.
    pub fn canonical_hash(&self) -> String {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.wall_time_ms = 0.0;
        }
        let bytes = serde_json::to_vec(&r).expect("report serialises");
        hex::encode(Sha256::digest(&bytes))
    }
}

enum Source {
    Fixed(Graph, usize),
    Generated(GenSpec),
}

pub fn run_trials(config: &TrialConfig) -> Result<TrialReport, TrialError> {
    config.validate()?;
    let source = match &config.instance {
        InstanceSpec::File(path) => {
            let g = Graph::read_edge_list(path)?;
            let mu = max_matching(&g).len();
            Source::Fixed(g, mu)
        }
        InstanceSpec::Generated(spec) => Source::Generated(*spec),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count())
        .build()
        .map_err(|e| TrialError::Config(e.to_string()))?;
    let results: Vec<Result<TrialRecord, TrialError>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_one(config, &source, i))
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    TrialReport::from_records(config, records)
}

fn run_one(config: &TrialConfig, source: &Source, index: usize) -> Result<TrialRecord, TrialError> {
    let started = Instant::now();
    let seed = derive_seed(config.base_seed, index as u64);
    let generated;
    let (g, mu_g) = match source {
        Source::Fixed(g, mu) => (g, *mu),
        Source::Generated(spec) => {
            generated = gen_random(spec, seed)?;
            let mu = max_matching(&generated).len();
            (&generated, mu)
        }
    };
    let stream = make_stream(g, seed)?;
    let params = &config.params;
    let mut rec = TrialRecord {
        index,
        seed,
        output_size: 0,
        mu_g,
        ratio: 1.0,
        h_size: None,
        u_size: None,
        t_size: None,
        m_h_size: None,
        m_size: None,
        mu_hu: None,
        path_histogram: None,
        checks: CheckOutcomes::default(),
        wall_time_ms: 0.0,
    };
    match config.algo {
        Algorithm::Greedy => rec.output_size = greedy_match(&stream).len(),
        Algorithm::Bernstein => {
            let out = bernstein_match(&stream, params)?;
            let mu_hu = out.matching.len();
            let m_h = max_matching(&out.sparsifier.h);
            rec.output_size = mu_hu;
            rec.h_size = Some(out.sparsifier.h.m());
            rec.u_size = Some(out.sparsifier.u.len());
            rec.m_h_size = Some(m_h.len());
            rec.mu_hu = Some(mu_hu);
            let measures = RunMeasures {
                mu_g_prime: crate::analyzer::g_prime(&stream, &out.split, &out.sparsifier.h)
                    .map(|gp| max_matching(&gp).len())?,
                mu_h: m_h.len(),
                mu_hu,
            };
            structural_checks(
                config,
                &stream,
                &out.split,
                &out.sparsifier,
                &m_h,
                &measures,
                &mut rec.checks,
            )?;
        }
        Algorithm::Beats23 => {
            let mut rng = rng_for(seed, PHASE_SUBSTREAM);
            let (out, diag) = beats23_match(&stream, params, &mut rng)?;
            rec.output_size = out.len();
            fill_diagnostics(&mut rec, &diag);
            let measures = run_measures(&stream, &diag)?;
            structural_checks(
                config,
                &stream,
                &diag.split,
                &diag.sparsifier,
                &diag.m_h,
                &measures,
                &mut rec.checks,
            )?;
            rec.checks.soundness = Some(soundness_violations(&stream, &diag, &out));
        }
    }
    if mu_g > 0 {
        rec.ratio = rec.output_size as f64 / mu_g as f64;
    }
    rec.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

fn fill_diagnostics(rec: &mut TrialRecord, diag: &TrialDiagnostics) {
    rec.h_size = Some(diag.sparsifier.h.m());
    rec.u_size = Some(diag.sparsifier.u.len());
    rec.t_size = Some(diag.t.len());
    rec.m_h_size = Some(diag.m_h.len());
    rec.m_size = Some(diag.augmented.matching.len());
    rec.mu_hu = Some(diag.mu_hu);
    rec.path_histogram = Some(diag.path_histogram());
}

fn structural_checks(
    config: &TrialConfig,
    stream: &crate::stream::EdgeStream<'_>,
    split: &PhaseSplit,
    sparsifier: &crate::sparsifier::Sparsifier,
    m_h: &crate::matching::Matching,
    measures: &RunMeasures,
    out: &mut CheckOutcomes,
) -> Result<(), TrialError> {
    let g = stream.graph();
    if config.checks.edcs {
        let r = check_edcs(
            g,
            &sparsifier.h,
            &sparsifier.u,
            &config.params,
            &stream.range(split.phase_two()),
        );
        out.edcs = Some(EdcsOutcome {
            passed: r.passed(),
            not_in_g: r.not_in_g.len(),
            degree_violations: r.degree_violations.len(),
            missing_u: r.missing_u.len(),
            extra_u: r.extra_u.len(),
        });
    }
    let bipartite = g.bipartition().is_some();
    out.dichotomy = config
        .checks
        .dichotomy
        .iter()
        .map(|&d| dichotomy_for_run(measures, &config.params, d, bipartite))
        .collect();
    if config.checks.census {
        let m_star = late_maximum_matching(stream, split)?;
        let phases = phase_map(stream, split);
        let census = classify_lucky(&path_census(&m_star, m_h), |e| phases.get(&e).copied())
            .expect("every census edge is a stream edge");
        out.census = Some(CensusOutcome {
            m_star: census.m_star_size,
            m_h: census.m_h_size,
            paths: census.paths.len(),
            by_length: census.counts_by_length(),
            lucky: census.lucky_count().unwrap_or(0),
            observation_holds: census.observation_holds(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

impl ReportFormat {
    /// `csv` for a `.csv` path, JSON otherwise.
    pub fn for_path(path: &FsPath) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

const CSV_HEADER: [&str; 19] = [
    "index",
    "seed",
    "output_size",
    "mu_g",
    "ratio",
    "h_size",
    "u_size",
    "t_size",
    "m_h_size",
    "m_size",
    "mu_hu",
    "paths_len1",
    "paths_len3",
    "paths_len5",
    "checks_passed",
    "wall_time_ms",
    "min_ratio",
    "max_ratio",
    "stderr_ratio",
];

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `report` as pretty JSON, or as CSV with one row per trial and a final `#agg` row.
pub fn write_report<W: Write>(report: &TrialReport, format: ReportFormat, mut w: W) -> Result<(), TrialError> {
    if report.records.is_empty() {
        return Err(TrialError::Config("a report needs at least one trial".into()));
    }
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
        ReportFormat::Csv => {
            let mut cw = csv::Writer::from_writer(w);
            cw.write_record(CSV_HEADER)?;
            for r in &report.records {
                let h = r.path_histogram;
                cw.write_record([
                    r.index.to_string(),
                    r.seed.to_string(),
                    r.output_size.to_string(),
                    r.mu_g.to_string(),
                    r.ratio.to_string(),
                    opt(r.h_size),
                    opt(r.u_size),
                    opt(r.t_size),
                    opt(r.m_h_size),
                    opt(r.m_size),
                    opt(r.mu_hu),
                    opt(h.map(|h| h[0])),
                    opt(h.map(|h| h[1])),
                    opt(h.map(|h| h[2])),
                    r.checks.passed().to_string(),
                    r.wall_time_ms.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?;
            }
            let a = &report.aggregate;
            let mut row = vec![String::new(); CSV_HEADER.len()];
            row[0] = "#agg".into();
            row[2] = a.mean_output.to_string();
            row[3] = a.mean_mu_g.to_string();
            row[4] = a.mean_ratio.to_string();
            row[14] = a.checks_passed.to_string();
            row[16] = a.min_ratio.to_string();
            row[17] = a.max_ratio.to_string();
            row[18] = a.stderr_ratio.to_string();
            cw.write_record(&row)?;
            cw.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(report: &TrialReport, format: ReportFormat, path: impl AsRef<FsPath>) -> Result<(), TrialError> {
    let file = std::fs::File::create(path)?;
    write_report(report, format, std::io::BufWriter::new(file))
}
