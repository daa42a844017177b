//! Fault datasets: the in-memory model, the on-disk directory format,
//! synthetic generation and cross-validation splits.

pub mod folds;
pub mod interp;
pub mod io;
pub mod synth;

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use folds::{split_folds, Fold};
pub use io::{load_dataset, save_dataset};
pub use synth::{generate_synthetic, FaultKind, FaultRule, SyntheticSpec, Template};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing dataset file {0}")]
    MissingFile(PathBuf),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid cell value {value:?} in {file} at row {row}, column {col}")]
    InvalidCellValue {
        file: String,
        row: usize,
        col: usize,
        value: String,
    },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("malformed {file}: {message}")]
    Format { file: String, message: String },
    #[error("dataset has faults but no failing test")]
    NoFailingTests,
    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),
    #[error("too few instances: {instances} for {folds} folds")]
    TooFewInstances { instances: usize, folds: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("program error: {0}")]
    Program(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: usize,
    pub file: String,
    /// One-based line number within `file`.
    pub line: usize,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    pub id: String,
    pub statement: usize,
    /// One entry per test; true when the test observes a different result.
    pub kills: Vec<bool>,
}

/// One faulty program version with its test spectra and ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultDataset {
    pub name: String,
    pub statements: Vec<Statement>,
    pub test_ids: Vec<String>,
    /// Tests x statements.
    pub coverage: Vec<Vec<bool>>,
    pub outcomes: Vec<Verdict>,
    pub mutants: Vec<Mutant>,
    pub faults: BTreeSet<usize>,
}

impl FaultDataset {
    pub fn n_statements(&self) -> usize {
        self.statements.len()
    }

    pub fn n_tests(&self) -> usize {
        self.outcomes.len()
    }

    pub fn failing_count(&self) -> usize {
        self.outcomes.iter().filter(|v| **v == Verdict::Fail).count()
    }

    /// Per-statement ground-truth labels.
    pub fn labels(&self) -> Vec<bool> {
        (0..self.n_statements())
            .map(|i| self.faults.contains(&i))
            .collect()
    }

    /// Source text grouped by file, in statement order.
    pub fn sources(&self) -> Vec<(String, Vec<usize>, String)> {
        let mut groups: Vec<(String, Vec<usize>, String)> = Vec::new();
        for s in &self.statements {
            match groups.last_mut() {
                Some((file, ids, text)) if *file == s.file => {
                    ids.push(s.id);
                    text.push('\n');
                    text.push_str(&s.text);
                }
                _ => groups.push((s.file.clone(), vec![s.id], s.text.clone())),
            }
        }
        groups
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let n_stmts = self.statements.len();
        let n_tests = self.outcomes.len();
        if n_tests == 0 {
            return Err(CorpusError::DimensionMismatch(
                "dataset has no tests".into(),
            ));
        }
        if self.test_ids.len() != n_tests || self.coverage.len() != n_tests {
            return Err(CorpusError::DimensionMismatch(format!(
                "{} coverage rows, {} outcomes, {} test ids",
                self.coverage.len(),
                n_tests,
                self.test_ids.len()
            )));
        }
        for (i, s) in self.statements.iter().enumerate() {
            if s.id != i {
                return Err(CorpusError::DimensionMismatch(format!(
                    "statement ids must be 0..{n_stmts} in order, found {} at position {i}",
                    s.id
                )));
            }
        }
        if let Some((t, row)) = self
            .coverage
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != n_stmts)
        {
            return Err(CorpusError::DimensionMismatch(format!(
                "coverage row {t} has {} cells, expected {n_stmts}",
                row.len()
            )));
        }
        for m in &self.mutants {
            if m.statement >= n_stmts {
                return Err(CorpusError::DanglingReference(format!(
                    "mutant {} targets statement {} of {n_stmts}",
                    m.id, m.statement
                )));
            }
            if m.kills.len() != n_tests {
                return Err(CorpusError::DimensionMismatch(format!(
                    "mutant {} has {} kill cells, expected {n_tests}",
                    m.id,
                    m.kills.len()
                )));
            }
        }
        if let Some(&f) = self.faults.iter().find(|&&f| f >= n_stmts) {
            return Err(CorpusError::DanglingReference(format!(
                "fault id {f} out of range for {n_stmts} statements"
            )));
        }
        if !self.faults.is_empty() && self.failing_count() == 0 {
            return Err(CorpusError::NoFailingTests);
        }
        Ok(())
    }
}
