//! Seed batches: generate a benchmark, discover its graph, evaluate, aggregate.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{generate, make_timeline, NoiseSpec, SystemKind};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricReport};
use crate::gp::KernelKind;
use crate::mdl::{Precisions, ScoreConfig, DEFAULT_SIGMA_FLOOR};
use crate::search::{discover, SearchConfig};

fn default_kernel() -> String {
    "rbf".into()
}
fn default_order() -> usize {
    3
}
fn default_p() -> u32 {
    2
}
fn default_bits() -> u32 {
    32
}
fn default_restarts() -> usize {
    5
}
fn default_max_iter() -> usize {
    200
}
fn default_sigma_floor() -> f64 {
    DEFAULT_SIGMA_FLOOR
}
fn default_alpha() -> f64 {
    0.001
}
fn default_true() -> bool {
    true
}

/// Experiment description, usually read from TOML. Unset simulation fields take
/// the family's default protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    pub dim: Option<usize>,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    #[serde(default)]
    pub irregularity: f64,
    pub noise_sigma: Option<f64>,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default = "default_order")]
    pub integrator_order: usize,
    #[serde(default = "default_p")]
    pub precision_p: u32,
    #[serde(default = "default_bits")]
    pub r_d: u32,
    #[serde(default = "default_bits")]
    pub r_lambda: u32,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Mixed into every seed's hyperparameter initialization.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma_floor")]
    pub sigma_floor: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_true")]
    pub self_loops: bool,
    #[serde(default = "default_true")]
    pub prefilter: bool,
    pub max_parents: Option<usize>,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Config for `system` with every other field at its default.
    pub fn new(system: SystemKind, seeds: Vec<u64>) -> Self {
        Self {
            system,
            dim: None,
            t_start: 0.0,
            t_end: None,
            dt: None,
            irregularity: 0.0,
            noise_sigma: None,
            kernel: default_kernel(),
            integrator_order: default_order(),
            precision_p: default_p(),
            r_d: default_bits(),
            r_lambda: default_bits(),
            restarts: default_restarts(),
            max_iter: default_max_iter(),
            seed: 0,
            sigma_floor: default_sigma_floor(),
            alpha: default_alpha(),
            self_loops: true,
            prefilter: true,
            max_parents: None,
            seeds,
            output_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        self.score_config(0)?.validate()?;
        self.search_config().validate()?;
        if let Some(s) = self.noise_sigma {
            NoiseSpec::new(s)?;
        }
        Ok(())
    }

    pub fn resolved_dim(&self) -> usize {
        self.dim.unwrap_or(self.system.protocol().dim)
    }

    pub fn score_config(&self, run_seed: u64) -> Result<ScoreConfig> {
        let kernel: KernelKind = self.kernel.parse()?;
        Ok(ScoreConfig {
            kernel,
            order: self.integrator_order,
            precisions: Precisions { r_d: self.r_d, r_lambda: self.r_lambda, p: self.precision_p },
            restarts: self.restarts,
            max_iter: self.max_iter,
            seed: self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(run_seed),
            sigma_floor: self.sigma_floor,
        })
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            significance_alpha: self.alpha,
            allow_self_loops: self.self_loops,
            max_parents: self.max_parents,
            prefilter: self.prefilter,
        }
    }
}

/// Outcome of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub error: Option<String>,
    pub n_samples: usize,
    pub true_edges: usize,
    pub discovered_edges: Option<usize>,
    pub metrics: Option<MetricReport>,
    /// NSHD of the empty graph on the same data.
    pub empty_baseline_nshd: Option<f64>,
    pub total_bits: Option<f64>,
    pub models_fitted: Option<usize>,
    pub runtime_s: f64,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Mean and sample standard deviation; `None` for no values.
pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(Aggregate { mean, std, count: values.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<SeedRow>,
    /// Metric name to aggregate over the successful seeds.
    pub aggregates: Vec<(String, Aggregate)>,
    pub failed_seeds: usize,
}

impl ExperimentReport {
    pub fn all_failed(&self) -> bool {
        self.failed_seeds == self.rows.len()
    }

    pub fn aggregate(&self, name: &str) -> Option<Aggregate> {
        self.aggregates.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRow> {
    let start = Instant::now();
    let proto = cfg.system.protocol();
    let dim = cfg.resolved_dim();
    let timeline = make_timeline(
        cfg.t_start,
        cfg.t_end.unwrap_or(proto.t_end),
        cfg.dt.unwrap_or(proto.dt),
        cfg.irregularity,
        seed,
    )?;
    let noise = NoiseSpec::new(cfg.noise_sigma.unwrap_or(proto.noise_sigma))?;
    let run = generate(cfg.system, dim, &timeline, noise, seed)?;
    let found = discover(&run.trajectory, &cfg.score_config(seed)?, &cfg.search_config())?;
    let metrics = evaluate(&found.graph, &run.truth, &found.final_gains)?;
    let empty = crate::types::CausalGraph::empty(dim)?;
    let runtime_s = start.elapsed().as_secs_f64();
    log::info!(
        "{} seed {seed}: {} edges, nshd {:.3}, {:.1}s, {} fits",
        cfg.system,
        found.graph.edge_count(),
        metrics.nshd,
        runtime_s,
        found.models_fitted
    );
    Ok(SeedRow {
        seed,
        error: None,
        n_samples: timeline.len(),
        true_edges: run.truth.edge_count(),
        discovered_edges: Some(found.graph.edge_count()),
        metrics: Some(metrics),
        empty_baseline_nshd: Some(crate::eval::nshd(&empty, &run.truth)?),
        total_bits: Some(found.total_bits),
        models_fitted: Some(found.models_fitted),
        runtime_s,
        edges: found.graph.edges().into_iter().map(|(i, j)| [i, j]).collect(),
    })
}

/// Runs every seed (concurrently), aggregates, and writes `report.json`,
/// `runs.csv` and `summary.csv` when an output directory is configured.
///
/// Failed seeds are recorded in their rows; only an invalid config is an error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let rows: Vec<SeedRow> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            run_seed(cfg, seed).unwrap_or_else(|e| {
                log::warn!("{} seed {seed} failed: {e}", cfg.system);
                SeedRow {
                    seed,
                    error: Some(e.to_string()),
                    n_samples: 0,
                    true_edges: 0,
                    discovered_edges: None,
                    metrics: None,
                    empty_baseline_nshd: None,
                    total_bits: None,
                    models_fitted: None,
                    runtime_s: 0.0,
                    edges: Vec::new(),
                }
            })
        })
        .collect();
    let failed_seeds = rows.iter().filter(|r| r.error.is_some()).count();
    let report = ExperimentReport { config: cfg.clone(), aggregates: aggregates(&rows), rows, failed_seeds };
    if let Some(dir) = &cfg.output_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

type Extractor = fn(&SeedRow) -> Option<f64>;

const COLUMNS: [(&str, Extractor); 10] = [
    ("discovered_edges", |r| r.discovered_edges.map(|v| v as f64)),
    ("shd", |r| r.metrics.map(|m| m.shd as f64)),
    ("nshd", |r| r.metrics.map(|m| m.nshd)),
    ("precision", |r| r.metrics.map(|m| m.precision)),
    ("recall", |r| r.metrics.map(|m| m.recall)),
    ("f1", |r| r.metrics.map(|m| m.f1)),
    ("auprc", |r| r.metrics.and_then(|m| m.auprc)),
    ("empty_baseline_nshd", |r| r.empty_baseline_nshd),
    ("total_bits", |r| r.total_bits),
    ("runtime_s", |r| r.error.is_none().then_some(r.runtime_s)),
];

fn aggregates(rows: &[SeedRow]) -> Vec<(String, Aggregate)> {
    COLUMNS
        .iter()
        .filter_map(|(name, get)| {
            let vals: Vec<f64> = rows.iter().filter_map(get).collect();
            aggregate(&vals).map(|a| (name.to_string(), a))
        })
        .collect()
}

fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;

    let mut runs = csv::Writer::from_path(dir.join("runs.csv")).map_err(|e| Error::Config(e.to_string()))?;
    let mut header = vec!["seed".to_string(), "error".to_string()];
    header.extend(COLUMNS.iter().map(|(n, _)| n.to_string()));
    runs.write_record(&header).map_err(|e| Error::Config(e.to_string()))?;
    for r in &report.rows {
        let mut rec = vec![r.seed.to_string(), r.error.clone().unwrap_or_default()];
        rec.extend(COLUMNS.iter().map(|(_, get)| get(r).map(|v| v.to_string()).unwrap_or_default()));
        runs.write_record(&rec).map_err(|e| Error::Config(e.to_string()))?;
    }
    runs.flush()?;

    let mut summary = csv::Writer::from_path(dir.join("summary.csv")).map_err(|e| Error::Config(e.to_string()))?;
    summary.write_record(["metric", "mean", "std", "count"]).map_err(|e| Error::Config(e.to_string()))?;
    for (name, a) in &report.aggregates {
        summary
            .write_record([name.clone(), a.mean.to_string(), a.std.to_string(), a.count.to_string()])
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    summary.flush()?;
    Ok(())
}
