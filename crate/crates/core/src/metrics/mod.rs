//! Ranking metrics, baseline rankers and report emission.

pub mod ranking;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FaultDataset;
use crate::features::spectrum::{dstar, spectrum_counts, tarantula};
use crate::features::FeatureError;

pub use ranking::{
    accuracy_stability, auc, auc_half_counts, fault_rank, rank_statements, topn_mar_mfr,
    ConfusionMatrix, FaultRank, TopN,
};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no faulty statements to evaluate")]
    NoFaults,
    #[error("AUC needs at least one faulty and one correct statement")]
    SingleClass,
    #[error("score vector has {scores} entries for {statements} statements")]
    LengthMismatch { scores: usize, statements: usize },
    #[error("non-finite suspiciousness score")]
    NonFinite,
    #[error(transparent)]
    Features(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Tarantula,
    Dstar,
}

impl Baseline {
    pub const ALL: [Baseline; 2] = [Baseline::Tarantula, Baseline::Dstar];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Tarantula => "tarantula",
            Baseline::Dstar => "dstar",
        }
    }

    pub fn scores(self, dataset: &FaultDataset) -> Result<Vec<f64>, MetricsError> {
        let counts = spectrum_counts(dataset)?;
        Ok(counts
            .statements
            .iter()
            .map(|c| match self {
                Baseline::Tarantula => tarantula(c, counts.failing, counts.passing),
                Baseline::Dstar => dstar(c),
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeReport {
    pub evaluation_count: u64,
    pub instances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_avg_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_total_s: Option<f64>,
}

/// Evaluation counts always; `T_total = T_avg * N_instance` when a wall-clock
/// measurement over `instances` instances is supplied.
pub fn time_accounting(evaluation_count: u64, instances: usize, wall: Option<Duration>) -> TimeReport {
    let (t_avg_s, t_total_s) = match wall {
        Some(_) if instances == 0 => (Some(0.0), Some(0.0)),
        Some(d) => {
            let avg = d.as_secs_f64() / instances as f64;
            (Some(avg), Some(avg * instances as f64))
        }
        None => (None, None),
    };
    TimeReport {
        evaluation_count,
        instances,
        t_avg_s,
        t_total_s,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedStatement {
    pub id: usize,
    pub suspiciousness: f64,
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub top1: usize,
    pub top3: usize,
    pub top5: usize,
    pub mar: f64,
    pub mfr: f64,
    pub auc: Option<f64>,
    pub faults: usize,
}

impl Summary {
    /// Top-N counts summed, ranks and AUC averaged.
    pub fn aggregate<'a>(summaries: impl IntoIterator<Item = &'a Summary>) -> Option<Summary> {
        let all: Vec<&Summary> = summaries.into_iter().collect();
        if all.is_empty() {
            return None;
        }
        let faults: usize = all.iter().map(|s| s.faults).sum();
        let weighted = |f: fn(&Summary) -> f64| {
            all.iter().map(|s| f(s) * s.faults as f64).sum::<f64>() / faults as f64
        };
        let aucs: Vec<f64> = all.iter().filter_map(|s| s.auc).collect();
        Some(Summary {
            top1: all.iter().map(|s| s.top1).sum(),
            top3: all.iter().map(|s| s.top3).sum(),
            top5: all.iter().map(|s| s.top5).sum(),
            mar: weighted(|s| s.mar),
            mfr: weighted(|s| s.mfr),
            auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
            faults,
        })
    }

    /// Localization accuracy at `n`: Top-N over total faults.
    pub fn loc_acc(&self, n: usize) -> f64 {
        let hits = match n {
            1 => self.top1,
            3 => self.top3,
            5 => self.top5,
            _ => panic!("loc_acc is defined for N in {{1, 3, 5}}"),
        };
        hits as f64 / self.faults as f64
    }
}

/// Ranking of one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub model: String,
    pub dataset: String,
    pub seed: u64,
    pub statements: Vec<RankedStatement>,
    pub fault: FaultRank,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clf_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeReport>,
}

impl RankingReport {
    pub fn build(
        model: &str,
        dataset: &str,
        seed: u64,
        scores: &[f64],
        faults: &BTreeSet<usize>,
    ) -> Result<Self, MetricsError> {
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(MetricsError::NonFinite);
        }
        if faults.iter().any(|&f| f >= scores.len()) {
            return Err(MetricsError::LengthMismatch {
                scores: scores.len(),
                statements: faults.iter().max().map_or(0, |f| f + 1),
            });
        }
        let ranks = rank_statements(scores);
        let faulty: Vec<usize> = faults.iter().copied().collect();
        let fault = fault_rank(&ranks, &faulty)?;
        let t = topn_mar_mfr(&[fault])?;
        let labels: Vec<bool> = (0..scores.len()).map(|i| faults.contains(&i)).collect();
        Ok(RankingReport {
            model: model.to_string(),
            dataset: dataset.to_string(),
            seed,
            statements: scores
                .iter()
                .zip(&ranks)
                .enumerate()
                .map(|(id, (&s, &r))| RankedStatement {
                    id,
                    suspiciousness: s,
                    rank: r,
                })
                .collect(),
            fault,
            summary: Summary {
                top1: t.top1,
                top3: t.top3,
                top5: t.top5,
                mar: t.mar,
                mfr: t.mfr,
                auc: auc(scores, &labels).ok(),
                faults: 1,
            },
            clf_acc: None,
            stability: None,
            time: None,
        })
    }

    pub fn baseline(baseline: Baseline, dataset: &FaultDataset, seed: u64) -> Result<Self, MetricsError> {
        let scores = baseline.scores(dataset)?;
        Self::build(baseline.name(), &dataset.name, seed, &scores, &dataset.faults)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model: String,
    pub datasets: usize,
    pub summary: Summary,
}

/// All reports of a run plus one aggregate per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub reports: Vec<RankingReport>,
    pub aggregates: Vec<AggregateRow>,
}

impl ReportSet {
    pub fn new(reports: Vec<RankingReport>) -> Self {
        let mut models: Vec<String> = Vec::new();
        for r in &reports {
            if !models.contains(&r.model) {
                models.push(r.model.clone());
            }
        }
        let aggregates = models
            .into_iter()
            .filter_map(|m| {
                let mine: Vec<&RankingReport> = reports.iter().filter(|r| r.model == m).collect();
                Summary::aggregate(mine.iter().map(|r| &r.summary)).map(|summary| AggregateRow {
                    model: m,
                    datasets: mine.len(),
                    summary,
                })
            })
            .collect();
        ReportSet { reports, aggregates }
    }

    pub fn aggregate(&self, model: &str) -> Option<&Summary> {
        self.aggregates.iter().find(|a| a.model == model).map(|a| &a.summary)
    }

    /// One row per model x dataset, then one `*` row per model.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\tdataset\ttop1\ttop3\ttop5\tmar\tmfr\tauc\n");
        let mut row = |model: &str, dataset: &str, s: &Summary| {
            let auc = s.auc.map_or_else(|| "NA".to_string(), |a| a.to_string());
            let _ = writeln!(
                out,
                "{model}\t{dataset}\t{}\t{}\t{}\t{}\t{}\t{auc}",
                s.top1, s.top3, s.top5, s.mar, s.mfr
            );
        };
        for r in &self.reports {
            row(&r.model, &r.dataset, &r.summary);
        }
        for a in &self.aggregates {
            row(&a.model, "*", &a.summary);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SyntheticSpec, Template};
    use crate::features::{assemble_features, spectrum::StatementCounts};

    #[test]
    fn identical_scores_identical_reports() {
        let d = generate_synthetic(&SyntheticSpec::new(Template::Median3, 60, 7)).unwrap();
        let base = RankingReport::baseline(Baseline::Tarantula, &d, 7).unwrap();
        let scores: Vec<f64> = base.statements.iter().map(|s| s.suspiciousness).collect();
        let other = RankingReport::build("tarantula", &d.name, 7, &scores, &d.faults).unwrap();
        assert_eq!(base, other);
    }

    #[test]
    fn tarantula_matches_feature_column() {
        let d = generate_synthetic(&SyntheticSpec::new(Template::Triangle, 80, 3)).unwrap();
        let m = assemble_features(&d).unwrap();
        let j = m.column_index("sbfl", "tarantula").unwrap();
        let col = rank_statements(&m.column(j));
        let base = rank_statements(&Baseline::Tarantula.scores(&d).unwrap());
        assert_eq!(col, base);
    }

    #[test]
    fn only_failing_coverage_ranks_first() {
        let c = StatementCounts { ef: 2, ep: 0, nf: 0, np: 5 };
        assert_eq!(tarantula(&c, 2, 5), 1.0);
        let mut d = crate::corpus::fixtures::tiny();
        d.faults = [1].into();
        let r = RankingReport::baseline(Baseline::Tarantula, &d, 0).unwrap();
        assert_eq!(r.statements[1].rank, 1.0);
    }

    #[test]
    fn time_accounting_cases() {
        let t = time_accounting(20_100, 0, Some(Duration::from_secs(3)));
        assert_eq!(t.t_total_s, Some(0.0));
        let t = time_accounting(10, 4, Some(Duration::from_secs(2)));
        assert_eq!((t.t_avg_s, t.t_total_s), (Some(0.5), Some(2.0)));
        assert_eq!(time_accounting(10, 4, None).t_total_s, None);
    }

    #[test]
    fn tsv_has_aggregate_rows() {
        let d = generate_synthetic(&SyntheticSpec::new(Template::Median3, 40, 1)).unwrap();
        let reports = Baseline::ALL
            .iter()
            .map(|b| RankingReport::baseline(*b, &d, 1).unwrap())
            .collect();
        let set = ReportSet::new(reports);
        let tsv = set.to_tsv();
        assert_eq!(tsv.lines().count(), 5);
        assert!(tsv.lines().any(|l| l.starts_with("dstar\t*\t")));
    }

    #[test]
    fn empty_faults_rejected() {
        let d = crate::corpus::fixtures::tiny();
        let err = RankingReport::build("m", "d", 0, &[0.1, 0.2, 0.3], &BTreeSet::new());
        assert!(matches!(err, Err(MetricsError::NoFaults)));
        assert!(RankingReport::build("m", "d", 0, &[0.1, 0.2, 0.3], &d.faults).is_ok());
    }
}
