use super::{Column, Family, FeatureMatrix};
use crate::corpus::{FaultDataset, Verdict};

pub const MBFL_COLUMNS: [&str; 4] = [
    "max_mutant_susp",
    "mean_mutant_susp",
    "mutant_count",
    "killed_by_failing_ratio",
];

/// Ochiai-style mutant score `akf / sqrt(F * (akf + akp))`.
pub fn mutant_suspiciousness(akf: usize, akp: usize, failing: usize) -> f64 {
    let den = ((failing * (akf + akp)) as f64).sqrt();
    if den == 0.0 {
        0.0
    } else {
        akf as f64 / den
    }
}

/// Aggregates mutant kill data per statement. Statements without mutants
/// get zeros.
pub fn mbfl_features(dataset: &FaultDataset) -> FeatureMatrix {
    let failing = dataset.failing_count();
    let mut scores: Vec<Vec<(f64, bool)>> = vec![Vec::new(); dataset.n_statements()];
    for m in &dataset.mutants {
        let (mut akf, mut akp) = (0, 0);
        for (&killed, verdict) in m.kills.iter().zip(&dataset.outcomes) {
            if killed {
                match verdict {
                    Verdict::Fail => akf += 1,
                    Verdict::Pass => akp += 1,
                }
            }
        }
        scores[m.statement].push((mutant_suspiciousness(akf, akp, failing), akf > 0));
    }
    let rows = scores
        .iter()
        .map(|s| {
            if s.is_empty() {
                return vec![0.0; MBFL_COLUMNS.len()];
            }
            let n = s.len() as f64;
            let max = s.iter().map(|x| x.0).fold(0.0, f64::max);
            let mean = s.iter().map(|x| x.0).sum::<f64>() / n;
            let by_failing = s.iter().filter(|x| x.1).count() as f64 / n;
            vec![max, mean, n, by_failing]
        })
        .collect();
    FeatureMatrix::new(
        MBFL_COLUMNS.iter().map(|n| Column::new(*n, Family::Mbfl)).collect(),
        rows,
    )
}
