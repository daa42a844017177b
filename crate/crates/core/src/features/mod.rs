//! Per-statement feature extraction: spectrum (SBFL), mutation (MBFL) and
//! text (TBFL) families, assembled into one normalized matrix.

pub mod matrix;
pub mod mutation;
pub mod spectrum;

use thiserror::Error;

use crate::corpus::FaultDataset;
use crate::static_analysis::{count_text_features, StaticError};

pub use matrix::{Column, Family, FeatureMatrix};
pub use mutation::mbfl_features;
pub use spectrum::{sbfl_features, spectrum_counts, SpectrumCounts, StatementCounts};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("dataset has no failing tests")]
    NoFailingTests,
    #[error(transparent)]
    Static(#[from] StaticError),
    #[error("malformed feature table: {0}")]
    Format(String),
}

pub const TBFL_COLUMNS: [&str; 5] = ["line_length", "line_count", "variables", "symbols", "branch_paths"];

/// Text features per statement: line length, a per-line count contribution
/// (so the line-count reading of program size is also available), variable
/// count, symbol count and branch paths.
pub fn tbfl_features(dataset: &FaultDataset) -> Result<FeatureMatrix, FeatureError> {
    let mut rows = vec![vec![0.0; TBFL_COLUMNS.len()]; dataset.n_statements()];
    for (_, ids, source) in dataset.sources() {
        let text = count_text_features(&source)?;
        for (lf, id) in text.lines.iter().zip(ids) {
            rows[id] = vec![
                lf.length as f64,
                1.0,
                lf.variables as f64,
                lf.symbols as f64,
                lf.branch_paths as f64,
            ];
        }
    }
    Ok(FeatureMatrix::new(
        TBFL_COLUMNS.iter().map(|n| Column::new(*n, Family::Tbfl)).collect(),
        rows,
    ))
}

/// SBFL + MBFL + TBFL columns, each min-max normalized over statements.
pub fn assemble_features(dataset: &FaultDataset) -> Result<FeatureMatrix, FeatureError> {
    let counts = spectrum_counts(dataset)?;
    let mut m = sbfl_features(&counts)
        .hstack(&mbfl_features(dataset))
        .hstack(&tbfl_features(dataset)?);
    m.normalize_columns();
    Ok(m)
}
