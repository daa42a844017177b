//! Condenses Pareto-optimal feature subsets into one weighted feature set by
//! voting and frequency weighting.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{Column, Family};
use crate::moo::{selected, ParetoArchive};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("no ballots to vote on")]
    EmptyBallots,
    #[error("nothing selected to weigh")]
    EmptySelection,
    #[error("keep must be at least 1")]
    InvalidKeep,
    #[error("feature index {0} outside the {1} known columns")]
    UnknownFeature(usize, usize),
}

/// One archive member's selected features, weighted by its quality.
#[derive(Debug, Clone, PartialEq)]
pub struct Ballot {
    pub features: BTreeSet<usize>,
    pub weight: f64,
}

impl Ballot {
    pub fn new(features: impl IntoIterator<Item = usize>, weight: f64) -> Self {
        Ballot {
            features: features.into_iter().collect(),
            weight,
        }
    }
}

/// Keeps the `keep` most frequent features. Ties go to the larger summed
/// ballot weight, then the lower id.
pub fn vote(ballots: &[Ballot], keep: usize) -> Result<BTreeSet<usize>, FusionError> {
    if ballots.is_empty() {
        return Err(FusionError::EmptyBallots);
    }
    if keep == 0 {
        return Err(FusionError::InvalidKeep);
    }
    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for b in ballots {
        for &f in &b.features {
            let e = tally.entry(f).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += b.weight;
        }
    }
    let mut ranked: Vec<(usize, (usize, f64))> = tally.into_iter().collect();
    ranked.sort_by(|(fa, (ca, ma)), (fb, (cb, mb))| {
        cb.cmp(ca)
            .then_with(|| mb.partial_cmp(ma).unwrap_or(Ordering::Equal))
            .then_with(|| fa.cmp(fb))
    });
    Ok(ranked.into_iter().take(keep).map(|(f, _)| f).collect())
}

/// Selection frequency of each feature over `subsets`, scaled so the mean
/// weight is 1. Features never selected are dropped. Sorted by descending
/// weight, ties by id.
pub fn weigh(chosen: &BTreeSet<usize>, subsets: &[BTreeSet<usize>]) -> Result<Vec<(usize, f64)>, FusionError> {
    if subsets.is_empty() {
        return Err(FusionError::EmptyBallots);
    }
    let freq: Vec<(usize, f64)> = chosen
        .iter()
        .map(|&f| (f, subsets.iter().filter(|s| s.contains(&f)).count() as f64 / subsets.len() as f64))
        .filter(|(_, q)| *q > 0.0)
        .collect();
    if freq.is_empty() {
        return Err(FusionError::EmptySelection);
    }
    let mean = freq.iter().map(|(_, q)| q).sum::<f64>() / freq.len() as f64;
    Ok(order_by_weight(freq.into_iter().map(|(f, q)| (f, q / mean)).collect()))
}

pub fn order_by_weight(mut weights: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    weights.sort_by(|(fa, wa), (fb, wb)| wb.partial_cmp(wa).unwrap_or(Ordering::Equal).then_with(|| fa.cmp(fb)));
    weights
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedEntry {
    pub feature: String,
    pub family: Family,
    /// Column index in the feature matrix.
    pub column: usize,
    pub weight: f64,
}

/// Ordered, weighted feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedFeatureSet {
    pub entries: Vec<FusedEntry>,
}

impl FusedFeatureSet {
    pub fn from_weights(weights: &[(usize, f64)], columns: &[Column]) -> Result<Self, FusionError> {
        let entries = weights
            .iter()
            .map(|&(f, w)| {
                let c = columns
                    .get(f)
                    .ok_or(FusionError::UnknownFeature(f, columns.len()))?;
                Ok(FusedEntry {
                    feature: c.name.clone(),
                    family: c.family,
                    column: f,
                    weight: w,
                })
            })
            .collect::<Result<Vec<_>, FusionError>>()?;
        Ok(FusedFeatureSet { entries })
    }

    /// Summed weight per family, zero for absent families.
    pub fn family_weights(&self) -> BTreeMap<Family, f64> {
        let mut m: BTreeMap<Family, f64> = Family::ALL.iter().map(|&f| (f, 0.0)).collect();
        for e in &self.entries {
            *m.entry(e.family).or_default() += e.weight;
        }
        m
    }

    pub fn of_family(&self, family: Family) -> impl Iterator<Item = &FusedEntry> {
        self.entries.iter().filter(move |e| e.family == family)
    }
}

/// `ceil(n / 3)`.
pub fn default_keep(n_features: usize) -> usize {
    n_features.div_ceil(3).max(1)
}

/// Votes over archive members (each weighted by its accuracy) and weighs the
/// survivors by archive frequency.
pub fn fuse(archive: &ParetoArchive, columns: &[Column], keep: Option<usize>) -> Result<FusedFeatureSet, FusionError> {
    if archive.is_empty() {
        return Err(FusionError::EmptyBallots);
    }
    let ballots: Vec<Ballot> = archive
        .members()
        .iter()
        .map(|m| Ballot::new(selected(&m.bits), 1.0 - m.objectives.first().copied().unwrap_or(1.0)))
        .collect();
    let keep = keep.unwrap_or_else(|| default_keep(columns.len()));
    let chosen = vote(&ballots, keep)?;
    let subsets: Vec<BTreeSet<usize>> = ballots.into_iter().map(|b| b.features).collect();
    FusedFeatureSet::from_weights(&weigh(&chosen, &subsets)?, columns)
}
