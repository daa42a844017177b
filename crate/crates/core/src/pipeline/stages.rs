use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::artifacts::{self as art, BaselineRow, LabelRow, ScoreRow, Split};
use super::{resolve_dataset, PipelineError, RunConfig};
use crate::corpus::{split_folds, Fold};
use crate::features::{assemble_features, FeatureMatrix};
use crate::fusion::{fuse, FusedFeatureSet};
use crate::metrics::{accuracy_stability, time_accounting, Baseline, ConfusionMatrix, RankingReport, ReportSet};
use crate::moo::{optimize, EvalsRecord, OptimizerKind, ParetoArchive, ParetoRecord, WrapperObjective};
use crate::neural::{Checkpoint, LossPoint};

/// Classification threshold for `clf_acc`.
const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFile {
    pub optimizer: OptimizerKind,
    pub columns: Vec<String>,
    pub members: Vec<ParetoRecord>,
}

fn read_features(dir: &Path) -> Result<(Vec<String>, FeatureMatrix), PipelineError> {
    let path = dir.join(art::FEATURES);
    let file = fs::File::open(&path).map_err(art::io_err(&path))?;
    FeatureMatrix::read_csv(file).map_err(|e| PipelineError::Artifact {
        path,
        message: e.to_string(),
    })
}

struct Instances {
    features: FeatureMatrix,
    labels: Vec<LabelRow>,
}

impl Instances {
    fn load(dir: &Path) -> Result<Self, PipelineError> {
        let (keys, features) = read_features(dir)?;
        let labels: Vec<LabelRow> = art::read_rows(&dir.join(art::LABELS))?;
        if labels.len() != keys.len() || labels.iter().zip(&keys).any(|(l, k)| &l.key != k) {
            return Err(PipelineError::Artifact {
                path: dir.join(art::LABELS),
                message: "rows do not line up with features.csv".into(),
            });
        }
        Ok(Instances { features, labels })
    }

    fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].split == split).collect()
    }

    fn rows(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| self.features.rows[i].clone()).collect()
    }

    fn targets(&self, idx: &[usize]) -> Vec<bool> {
        idx.iter().map(|&i| self.labels[i].label == 1).collect()
    }
}

fn folds_for(labels: &[bool], cfg: &RunConfig) -> Result<Vec<Fold>, PipelineError> {
    let k = cfg.folds.min(labels.len());
    split_folds(labels, k, cfg.seed).map_err(|source| PipelineError::Corpus {
        dataset: "training instances".into(),
        source,
    })
}

/// Loads every dataset and writes `features.csv`, `labels.csv` and
/// `baselines.csv`.
pub fn extract(cfg: &RunConfig, dir: &Path) -> Result<(), PipelineError> {
    let sources = cfg.sources();
    let loaded = cfg.execution.map(&sources, |(src, held_out)| {
        let d = resolve_dataset(src, cfg)?;
        if d.faults.is_empty() {
            return Err(PipelineError::NoFaults(src.clone()));
        }
        let m = assemble_features(&d)?;
        let baselines: Vec<Vec<f64>> = Baseline::ALL.iter().map(|b| b.scores(&d)).collect::<Result<_, _>>()?;
        Ok((d, m, baselines, *held_out))
    });
    let mut names = BTreeSet::new();
    let mut matrix: Option<FeatureMatrix> = None;
    let (mut keys, mut labels, mut baselines) = (Vec::new(), Vec::new(), Vec::new());
    for item in loaded {
        let (d, m, b, held_out) = item?;
        if !names.insert(d.name.clone()) {
            return Err(PipelineError::Config(format!("dataset {:?} given twice", d.name)));
        }
        for (id, (&tarantula, &dstar)) in b[0].iter().zip(&b[1]).enumerate() {
            let key = format!("{}:{id}", d.name);
            keys.push(key.clone());
            labels.push(LabelRow {
                key: key.clone(),
                dataset: d.name.clone(),
                statement: id,
                label: d.faults.contains(&id) as u8,
                split: if held_out { Split::Test } else { Split::Train },
            });
            baselines.push(BaselineRow {
                key,
                tarantula,
                dstar,
            });
        }
        matrix = Some(match matrix {
            None => m,
            Some(acc) => acc.vstack(&m),
        });
    }
    let matrix = matrix.ok_or_else(|| PipelineError::Config("no dataset given".into()))?;
    let path = dir.join(art::FEATURES);
    let mut buf = Vec::new();
    matrix.write_csv(&keys, &mut buf)?;
    art::write_atomic(&path, &buf)?;
    art::write_rows(&dir.join(art::LABELS), &labels)?;
    art::write_rows(&dir.join(art::BASELINES), &baselines)
}

/// Runs the configured optimizer over the training instances and writes
/// `pareto.json` and `evals.json`.
pub fn select(cfg: &RunConfig, dir: &Path) -> Result<EvalsRecord, PipelineError> {
    let inst = Instances::load(dir)?;
    let idx = inst.indices(Split::Train);
    let rows = inst.rows(&idx);
    let labels = inst.targets(&idx);
    let folds = folds_for(&labels, cfg)?;
    let objective = WrapperObjective {
        rows: &rows,
        labels: &labels,
        folds: &folds,
        config: cfg.surrogate.clone(),
    };
    let result = optimize(
        cfg.optimizer,
        &objective,
        &cfg.optimizer_params,
        cfg.seed,
        cfg.execution,
        cfg.wall_clock,
    )?;
    let pareto = ParetoFile {
        optimizer: cfg.optimizer,
        columns: inst.features.columns.iter().map(|c| c.qualified()).collect(),
        members: result.archive.records(),
    };
    art::write_json(&dir.join(art::PARETO), &pareto)?;
    let evals = result.evals_record();
    art::write_json(&dir.join(art::EVALS), &evals)?;
    Ok(evals)
}

/// Votes and weighs the archive into `fused.json`.
pub fn fuse_stage(cfg: &RunConfig, dir: &Path) -> Result<FusedFeatureSet, PipelineError> {
    let (_, features) = read_features(dir)?;
    let pareto: ParetoFile = art::read_json(&dir.join(art::PARETO))?;
    let archive = ParetoArchive::from_records(&pareto.members)?;
    let n = features.n_cols();
    let keep = ((n as f64 * cfg.keep_fraction).ceil() as usize).clamp(1, n.max(1));
    let fused = fuse(&archive, &features.columns, Some(keep))?;
    art::write_json(&dir.join(art::FUSED), &fused)?;
    Ok(fused)
}

/// Trains the configured model on all training instances; writes
/// `model.json` and `loss.csv`.
pub fn train_stage(cfg: &RunConfig, dir: &Path) -> Result<Checkpoint, PipelineError> {
    let inst = Instances::load(dir)?;
    let fused: FusedFeatureSet = art::read_json(&dir.join(art::FUSED))?;
    let idx = inst.indices(Split::Train);
    let mut model = Checkpoint::init(cfg.model, &cfg.model_params, &fused, cfg.seed);
    let curve: Vec<LossPoint> = model.fit(&inst.rows(&idx), &inst.targets(&idx), &fused, cfg.execution)?;
    art::write_json(&dir.join(art::MODEL), &model)?;
    art::write_rows(&dir.join(art::LOSS), &curve)?;
    Ok(model)
}

/// Scores every evaluated statement into `scores.csv`.
///
/// Cross-dataset runs score the held-out datasets with the saved model.
/// Otherwise statements get out-of-fold scores from per-fold models, unless
/// some fold's training part is single-class, in which case the saved model
/// scores everything in-sample.
pub fn rank(cfg: &RunConfig, dir: &Path) -> Result<Vec<ScoreRow>, PipelineError> {
    let inst = Instances::load(dir)?;
    let fused: FusedFeatureSet = art::read_json(&dir.join(art::FUSED))?;
    let model: Checkpoint = art::read_json(&dir.join(art::MODEL))?;
    let baselines: Vec<BaselineRow> = art::read_rows(&dir.join(art::BASELINES))?;

    let mut scored: Vec<(usize, i64, f64)> = Vec::new();
    if cfg.is_cross() {
        let idx = inst.indices(Split::Test);
        let s = model.score_statements(&inst.rows(&idx), &fused, cfg.execution)?;
        scored.extend(idx.into_iter().zip(s).map(|(i, p)| (i, -1, p)));
    } else {
        let idx = inst.indices(Split::Train);
        let labels = inst.targets(&idx);
        let folds = folds_for(&labels, cfg)?;
        let degenerate = folds.iter().any(|f| {
            let pos = f.train.iter().filter(|&&i| labels[i]).count();
            pos == 0 || pos == f.train.len()
        });
        if degenerate {
            let s = model.score_statements(&inst.rows(&idx), &fused, cfg.execution)?;
            scored.extend(idx.into_iter().zip(s).map(|(i, p)| (i, -1, p)));
        } else {
            for (k, fold) in folds.iter().enumerate() {
                let train: Vec<usize> = fold.train.iter().map(|&j| idx[j]).collect();
                let test: Vec<usize> = fold.test.iter().map(|&j| idx[j]).collect();
                let mut m = Checkpoint::init(cfg.model, &cfg.model_params, &fused, cfg.seed);
                m.fit(&inst.rows(&train), &inst.targets(&train), &fused, cfg.execution)?;
                let s = m.score_statements(&inst.rows(&test), &fused, cfg.execution)?;
                scored.extend(test.into_iter().zip(s).map(|(i, p)| (i, k as i64, p)));
            }
        }
    }
    scored.sort_by_key(|&(i, _, _)| i);
    let rows: Vec<ScoreRow> = scored
        .into_iter()
        .map(|(i, fold, score)| {
            let l = &inst.labels[i];
            ScoreRow {
                key: l.key.clone(),
                dataset: l.dataset.clone(),
                statement: l.statement,
                fold,
                score,
                tarantula: baselines[i].tarantula,
                dstar: baselines[i].dstar,
            }
        })
        .collect();
    art::write_rows(&dir.join(art::SCORES), &rows)?;
    Ok(rows)
}

/// Builds one model report and two baseline reports per evaluated dataset;
/// writes `report.json` and `report.tsv`.
pub fn evaluate(cfg: &RunConfig, dir: &Path) -> Result<ReportSet, PipelineError> {
    let labels: Vec<LabelRow> = art::read_rows(&dir.join(art::LABELS))?;
    let scores: Vec<ScoreRow> = art::read_rows(&dir.join(art::SCORES))?;
    let evals: EvalsRecord = art::read_json(&dir.join(art::EVALS))?;
    let faulty: BTreeSet<&str> = labels.iter().filter(|l| l.label == 1).map(|l| l.key.as_str()).collect();
    let n_train = labels.iter().filter(|l| l.split == Split::Train).count();

    let mut fold_hits: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for s in &scores {
        let e = fold_hits.entry(s.fold).or_default();
        e.0 += ((s.score >= THRESHOLD) == faulty.contains(s.key.as_str())) as usize;
        e.1 += 1;
    }
    let fold_accs: Vec<f64> = fold_hits.values().map(|&(h, n)| h as f64 / n as f64).collect();
    let (_, stability) = accuracy_stability(&fold_accs);

    let mut order: Vec<&str> = Vec::new();
    let mut by_dataset: BTreeMap<&str, Vec<&ScoreRow>> = BTreeMap::new();
    for s in &scores {
        if !by_dataset.contains_key(s.dataset.as_str()) {
            order.push(&s.dataset);
        }
        by_dataset.entry(&s.dataset).or_default().push(s);
    }

    let model_name = cfg.model.to_string();
    let mut reports = Vec::new();
    for name in order {
        let rows = &by_dataset[name];
        let n = rows.iter().map(|r| r.statement).max().map_or(0, |m| m + 1);
        if rows.len() != n {
            return Err(PipelineError::Artifact {
                path: dir.join(art::SCORES),
                message: format!("dataset {name} is missing statement scores"),
            });
        }
        let column = |f: fn(&ScoreRow) -> f64| {
            let mut v = vec![0.0; n];
            for r in rows {
                v[r.statement] = f(r);
            }
            v
        };
        let (model_scores, tar, dst) = (column(|r| r.score), column(|r| r.tarantula), column(|r| r.dstar));
        let faults: BTreeSet<usize> = rows
            .iter()
            .filter(|r| faulty.contains(r.key.as_str()))
            .map(|r| r.statement)
            .collect();
        if faults.is_empty() {
            return Err(PipelineError::NoFaults(name.to_string()));
        }
        let truth: Vec<bool> = (0..n).map(|i| faults.contains(&i)).collect();
        let mut report = RankingReport::build(&model_name, name, cfg.seed, &model_scores, &faults)?;
        report.clf_acc = Some(ConfusionMatrix::from_scores(&model_scores, &truth, THRESHOLD).accuracy());
        report.stability = Some(stability);
        report.time = Some(time_accounting(
            evals.evaluation_count,
            n_train,
            evals.wall_clock_s.map(Duration::from_secs_f64),
        ));
        reports.push(report);
        for (b, s) in [(Baseline::Tarantula, &tar), (Baseline::Dstar, &dst)] {
            reports.push(RankingReport::build(b.name(), name, cfg.seed, s, &faults)?);
        }
    }
    let set = ReportSet::new(reports);
    art::write_json(&dir.join(art::REPORT_JSON), &set)?;
    art::write_atomic(&dir.join(art::REPORT_TSV), set.to_tsv().as_bytes())?;
    Ok(set)
}
