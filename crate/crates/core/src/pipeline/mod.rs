//! End-to-end orchestration: extract, select, fuse, train, rank, evaluate.
//!
//! Stages exchange data only through the files in the output directory, so
//! each can be re-run on its own.

pub mod artifacts;
mod stages;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{generate_synthetic, load_dataset, CorpusError, FaultDataset, SyntheticSpec, Template};
use crate::exec::Execution;
use crate::features::FeatureError;
use crate::fusion::FusionError;
use crate::metrics::{MetricsError, ReportSet};
use crate::moo::{EvalsRecord, MooError, OptimizerConfig, OptimizerKind, SurrogateConfig};
use crate::neural::{ModelConfig, ModelKind, NeuralError};

pub use stages::{evaluate, extract, fuse_stage, rank, select, train_stage};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("corpus: {dataset}: {source}")]
    Corpus {
        dataset: String,
        #[source]
        source: CorpusError,
    },
    #[error("corpus: {0}: no faulty statements listed")]
    NoFaults(String),
    #[error("features: {0}")]
    Features(#[from] FeatureError),
    #[error("moo: {0}")]
    Moo(#[from] MooError),
    #[error("fusion: {0}")]
    Fusion(#[from] FusionError),
    #[error("neural: {0}")]
    Neural(#[from] NeuralError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("artifact: {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

impl PipelineError {
    /// Process exit code for this class of failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Corpus { .. } | PipelineError::NoFaults(_) => 3,
            PipelineError::Io { .. } | PipelineError::Artifact { .. } => 4,
            _ => 5,
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Dataset directories or synthetic shorthands `template[:seed]`.
    pub datasets: Vec<String>,
    /// Cross-dataset mode: train on this dataset, evaluate on `test_on`.
    pub train_on: Option<String>,
    pub test_on: Vec<String>,
    /// Test count for synthetic shorthands.
    pub synth_tests: usize,
    pub optimizer: OptimizerKind,
    pub optimizer_params: OptimizerConfig,
    pub surrogate: SurrogateConfig,
    pub model: ModelKind,
    pub model_params: ModelConfig,
    /// Fraction of feature columns kept by voting.
    pub keep_fraction: f64,
    pub folds: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Adds measured timings to evals.json and the model reports.
    pub wall_clock: bool,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: Vec::new(),
            train_on: None,
            test_on: Vec::new(),
            synth_tests: 100,
            optimizer: OptimizerKind::Mopso,
            optimizer_params: OptimizerConfig::default(),
            surrogate: SurrogateConfig::default(),
            model: ModelKind::Rnn,
            model_params: ModelConfig::default(),
            keep_fraction: 1.0 / 3.0,
            folds: 10,
            seed: 7,
            out_dir: PathBuf::from("out"),
            wall_clock: false,
            execution: Execution::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let cross = self.train_on.is_some() || !self.test_on.is_empty();
        if cross && !self.datasets.is_empty() {
            return Err(PipelineError::Config(
                "use either --dataset or --train-on/--test-on, not both".into(),
            ));
        }
        if cross && (self.train_on.is_none() || self.test_on.is_empty()) {
            return Err(PipelineError::Config(
                "cross-dataset mode needs both --train-on and --test-on".into(),
            ));
        }
        if !cross && self.datasets.is_empty() {
            return Err(PipelineError::Config("no dataset given".into()));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(PipelineError::Config(format!(
                "keep fraction must lie in (0, 1], got {}",
                self.keep_fraction
            )));
        }
        if self.folds < 2 {
            return Err(PipelineError::Config(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }

    pub fn is_cross(&self) -> bool {
        self.train_on.is_some()
    }

    /// Dataset sources in pooling order, each tagged as held out or not.
    pub fn sources(&self) -> Vec<(String, bool)> {
        match &self.train_on {
            Some(t) => std::iter::once((t.clone(), false))
                .chain(self.test_on.iter().map(|s| (s.clone(), true)))
                .collect(),
            None => self.datasets.iter().map(|d| (d.clone(), false)).collect(),
        }
    }

    fn wall(&self) -> RunConfig {
        let mut c = self.clone();
        c.surrogate.wall_clock = self.wall_clock;
        c
    }
}

/// Loads a dataset directory, or generates `template[:seed]` synthetically.
pub fn resolve_dataset(source: &str, cfg: &RunConfig) -> Result<FaultDataset, PipelineError> {
    let path = Path::new(source);
    if path.is_dir() || source.contains(std::path::MAIN_SEPARATOR) {
        return load_dataset(path).map_err(|e| PipelineError::Corpus {
            dataset: source.to_string(),
            source: e,
        });
    }
    let (name, seed) = match source.split_once(':') {
        Some((n, s)) => (
            n,
            s.parse::<u64>()
                .map_err(|_| PipelineError::Config(format!("bad seed in dataset {source:?}")))?,
        ),
        None => (source, cfg.seed),
    };
    let template: Template = name.parse().map_err(|_| {
        PipelineError::Config(format!(
            "dataset {source:?} is neither a directory nor a template (median3, triangle, maxarray)"
        ))
    })?;
    generate_synthetic(&SyntheticSpec::new(template, cfg.synth_tests, seed)).map_err(|e| PipelineError::Corpus {
        dataset: source.to_string(),
        source: e,
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub reports: ReportSet,
    pub evals: EvalsRecord,
}

/// Runs every stage into a staging directory and moves the complete
/// artifact set into `out_dir`. On failure `out_dir` holds only an error
/// marker.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    let cfg = cfg.wall();
    let out = cfg.out_dir.clone();
    let staging = staging_dir(&out);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(artifacts::io_err(&staging))?;
    }
    fs::create_dir_all(&staging).map_err(artifacts::io_err(&staging))?;

    let result = run_stages(&cfg, &staging);
    let finish = match &result {
        Ok(_) => publish(&staging, &out),
        Err(e) => mark_failed(&staging, &out, e),
    };
    let summary = result?;
    finish?;
    Ok(RunSummary {
        out_dir: out,
        ..summary
    })
}

fn staging_dir(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| "out".into());
    name.push(".staging");
    out.with_file_name(name)
}

fn run_stages(cfg: &RunConfig, dir: &Path) -> Result<RunSummary, PipelineError> {
    extract(cfg, dir)?;
    let evals = select(cfg, dir)?;
    fuse_stage(cfg, dir)?;
    train_stage(cfg, dir)?;
    rank(cfg, dir)?;
    let reports = evaluate(cfg, dir)?;
    artifacts::write_json(&dir.join(artifacts::RESOLVED_CONFIG), cfg)?;
    Ok(RunSummary {
        out_dir: dir.to_path_buf(),
        reports,
        evals,
    })
}

fn publish(staging: &Path, out: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(out).map_err(artifacts::io_err(out))?;
    let marker = out.join(artifacts::ERROR_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(artifacts::io_err(&marker))?;
    }
    for name in artifacts::ALL {
        let to = out.join(name);
        fs::rename(staging.join(name), &to).map_err(artifacts::io_err(&to))?;
    }
    fs::remove_dir_all(staging).map_err(artifacts::io_err(staging))
}

fn mark_failed(staging: &Path, out: &Path, err: &PipelineError) -> Result<(), PipelineError> {
    let _ = fs::remove_dir_all(staging);
    fs::create_dir_all(out).map_err(artifacts::io_err(out))?;
    for name in artifacts::ALL {
        let stale = out.join(name);
        if stale.exists() {
            fs::remove_file(&stale).map_err(artifacts::io_err(&stale))?;
        }
    }
    artifacts::write_atomic(&out.join(artifacts::ERROR_MARKER), format!("{err}\n").as_bytes())
}

/// One cell of a matrix sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub optimizer: OptimizerKind,
    pub model: ModelKind,
    pub dataset: String,
    pub top1: usize,
    pub top3: usize,
    pub top5: usize,
    pub mar: f64,
    pub mfr: f64,
    pub auc: Option<f64>,
    pub evaluation_count: u64,
}

pub const MATRIX_TSV: &str = "matrix.tsv";

fn cell_dir_name(source: &str) -> String {
    source
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Runs every optimizer x model x dataset combination as its own
/// single-dataset pipeline under `base.out_dir/<dataset>/<optimizer>-<model>`
/// and writes `matrix.tsv`. Cells run concurrently; each cell is sequential.
pub fn run_matrix(
    base: &RunConfig,
    optimizers: &[OptimizerKind],
    models: &[ModelKind],
) -> Result<Vec<MatrixRow>, PipelineError> {
    if base.datasets.is_empty() {
        return Err(PipelineError::Config("matrix needs at least one --dataset".into()));
    }
    let mut cells = Vec::new();
    for d in &base.datasets {
        for &o in optimizers {
            for &m in models {
                let mut c = base.clone();
                c.datasets = vec![d.clone()];
                c.optimizer = o;
                c.model = m;
                c.execution = Execution::Sequential;
                c.out_dir = base.out_dir.join(cell_dir_name(d)).join(format!("{o}-{m}"));
                cells.push(c);
            }
        }
    }
    let results = base.execution.map(&cells, run_pipeline);
    let mut rows = Vec::with_capacity(cells.len());
    for (cfg, res) in cells.iter().zip(results) {
        let summary = res?;
        let model_name = cfg.model.to_string();
        for r in summary.reports.reports.iter().filter(|r| r.model == model_name) {
            rows.push(MatrixRow {
                optimizer: cfg.optimizer,
                model: cfg.model,
                dataset: r.dataset.clone(),
                top1: r.summary.top1,
                top3: r.summary.top3,
                top5: r.summary.top5,
                mar: r.summary.mar,
                mfr: r.summary.mfr,
                auc: r.summary.auc,
                evaluation_count: summary.evals.evaluation_count,
            });
        }
    }
    let mut tsv = String::from("optimizer\tmodel\tdataset\ttop1\ttop3\ttop5\tmar\tmfr\tauc\tevaluation_count\n");
    for r in &rows {
        let auc = r.auc.map_or_else(|| "NA".to_string(), |a| a.to_string());
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{auc}\t{}\n",
            r.optimizer, r.model, r.dataset, r.top1, r.top3, r.top5, r.mar, r.mfr, r.evaluation_count
        ));
    }
    fs::create_dir_all(&base.out_dir).map_err(artifacts::io_err(&base.out_dir))?;
    artifacts::write_atomic(&base.out_dir.join(MATRIX_TSV), tsv.as_bytes())?;
    Ok(rows)
}
