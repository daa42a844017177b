use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;

pub const FEATURES: &str = "features.csv";
pub const LABELS: &str = "labels.csv";
pub const BASELINES: &str = "baselines.csv";
pub const PARETO: &str = "pareto.json";
pub const EVALS: &str = "evals.json";
pub const FUSED: &str = "fused.json";
pub const MODEL: &str = "model.json";
pub const LOSS: &str = "loss.csv";
pub const SCORES: &str = "scores.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TSV: &str = "report.tsv";
pub const RESOLVED_CONFIG: &str = "resolved-config.json";
pub const ERROR_MARKER: &str = "ERROR";

/// Every file a successful run leaves behind.
pub const ALL: [&str; 12] = [
    FEATURES,
    LABELS,
    BASELINES,
    PARETO,
    EVALS,
    FUSED,
    MODEL,
    LOSS,
    SCORES,
    REPORT_JSON,
    REPORT_TSV,
    RESOLVED_CONFIG,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub key: String,
    pub dataset: String,
    pub statement: usize,
    pub label: u8,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub key: String,
    pub tarantula: f64,
    pub dstar: f64,
}

/// `fold` is the held-out fold that produced the score, or -1 when the
/// statement was scored by the full model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub key: String,
    pub dataset: String,
    pub statement: usize,
    pub fold: i64,
    pub score: f64,
    pub tarantula: f64,
    pub dstar: f64,
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn artifact_err(path: &Path, message: impl ToString) -> PipelineError {
    PipelineError::Artifact {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp: PathBuf = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| artifact_err(path, e))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| artifact_err(path, e))
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| artifact_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| artifact_err(path, e))?;
    write_atomic(path, &bytes)
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => PipelineError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => artifact_err(path, format!("{other:?}")),
    })?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| artifact_err(path, e))
}
