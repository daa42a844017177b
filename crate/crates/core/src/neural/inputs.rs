use serde::{Deserialize, Serialize};

use super::gru::Sequence;
use crate::features::Family;
use crate::fusion::FusedFeatureSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlpInputMode {
    /// One weight-averaged scalar per family (three inputs).
    #[default]
    FamilyMean,
    /// Every fused column scaled by its weight.
    Concat,
}

fn weighted(row: &[f64], fused: &FusedFeatureSet, family: Family) -> Vec<f64> {
    fused.of_family(family).map(|e| e.weight * row[e.column]).collect()
}

/// MLP input vector for one statement's feature row.
pub fn mlp_input(row: &[f64], fused: &FusedFeatureSet, mode: MlpInputMode) -> Vec<f64> {
    match mode {
        MlpInputMode::FamilyMean => Family::ALL
            .iter()
            .map(|&f| {
                let total: f64 = fused.of_family(f).map(|e| e.weight).sum();
                if total == 0.0 {
                    0.0
                } else {
                    fused.of_family(f).map(|e| e.weight * row[e.column]).sum::<f64>() / total
                }
            })
            .collect(),
        MlpInputMode::Concat => fused.entries.iter().map(|e| e.weight * row[e.column]).collect(),
    }
}

pub fn mlp_input_width(fused: &FusedFeatureSet, mode: MlpInputMode) -> usize {
    match mode {
        MlpInputMode::FamilyMean => Family::ALL.len(),
        MlpInputMode::Concat => fused.entries.len(),
    }
}

/// Step width: the largest fused family, at least 1.
pub fn sequence_width(fused: &FusedFeatureSet) -> usize {
    Family::ALL
        .iter()
        .map(|&f| fused.of_family(f).count())
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Weighted family vectors in SBFL, MBFL, TBFL order, each padded to the
/// common width with its own mean (0 for an empty family).
pub fn sequence_input(row: &[f64], fused: &FusedFeatureSet) -> Sequence {
    let n = sequence_width(fused);
    Family::ALL
        .iter()
        .map(|&f| {
            let mut v = weighted(row, fused, f);
            let mean = if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            };
            v.resize(n, mean);
            v
        })
        .collect()
}
