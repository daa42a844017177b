use serde::{Deserialize, Serialize};

use super::{Column, Family, FeatureError, FeatureMatrix};
use crate::corpus::{FaultDataset, Verdict};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementCounts {
    /// Failing tests that execute the statement.
    pub ef: usize,
    /// Passing tests that execute the statement.
    pub ep: usize,
    pub nf: usize,
    pub np: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumCounts {
    pub statements: Vec<StatementCounts>,
    pub failing: usize,
    pub passing: usize,
}

pub fn spectrum_counts(dataset: &FaultDataset) -> Result<SpectrumCounts, FeatureError> {
    let failing = dataset.failing_count();
    if failing == 0 {
        return Err(FeatureError::NoFailingTests);
    }
    let passing = dataset.n_tests() - failing;
    let mut statements = vec![StatementCounts::default(); dataset.n_statements()];
    for (row, verdict) in dataset.coverage.iter().zip(&dataset.outcomes) {
        for (c, &hit) in statements.iter_mut().zip(row) {
            match (verdict, hit) {
                (Verdict::Fail, true) => c.ef += 1,
                (Verdict::Pass, true) => c.ep += 1,
                _ => {}
            }
        }
    }
    for c in &mut statements {
        c.nf = failing - c.ef;
        c.np = passing - c.ep;
    }
    Ok(SpectrumCounts {
        statements,
        failing,
        passing,
    })
}

/// `num / den`, with 0/0 resolved to 0.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn tarantula(c: &StatementCounts, failing: usize, passing: usize) -> f64 {
    let f = ratio(c.ef as f64, failing as f64);
    let p = ratio(c.ep as f64, passing as f64);
    ratio(f, f + p)
}

pub fn ochiai(c: &StatementCounts, failing: usize) -> f64 {
    ratio(c.ef as f64, ((failing * (c.ef + c.ep)) as f64).sqrt())
}

pub fn jaccard(c: &StatementCounts, failing: usize) -> f64 {
    ratio(c.ef as f64, (failing + c.ep) as f64)
}

/// DStar with exponent 2; a zero denominator yields `ef²`.
pub fn dstar(c: &StatementCounts) -> f64 {
    let num = (c.ef * c.ef) as f64;
    let den = (c.ep + c.nf) as f64;
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub const SBFL_COLUMNS: [&str; 8] = [
    "ef", "ep", "nf", "np", "tarantula", "ochiai", "jaccard", "dstar",
];

pub fn sbfl_features(counts: &SpectrumCounts) -> FeatureMatrix {
    let (f, p) = (counts.failing, counts.passing);
    let rows = counts
        .statements
        .iter()
        .map(|c| {
            vec![
                c.ef as f64,
                c.ep as f64,
                c.nf as f64,
                c.np as f64,
                tarantula(c, f, p),
                ochiai(c, f),
                jaccard(c, f),
                dstar(c),
            ]
        })
        .collect();
    FeatureMatrix::new(
        SBFL_COLUMNS.iter().map(|n| Column::new(*n, Family::Sbfl)).collect(),
        rows,
    )
}
