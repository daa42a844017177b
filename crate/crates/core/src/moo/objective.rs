use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{selected, MooError};
use crate::corpus::Fold;
use crate::metrics::accuracy_stability;

/// Minimized objective vector for a genome.
pub trait Objective: Sync {
    fn n_genes(&self) -> usize;
    fn evaluate(&self, bits: &[bool]) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Third objective becomes measured seconds instead of the selected
    /// fraction.
    pub wall_clock: bool,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            epochs: 20,
            learning_rate: 1.0,
            wall_clock: false,
        }
    }
}

/// Trains a sigmoid perceptron on `train` rows restricted to `cols` and
/// returns its accuracy on `test` rows at threshold 0.5.
///
/// Zero initialization and full-batch gradient descent keep it
/// deterministic. The loss is class-balanced so that the rare faulty class
/// is not ignored.
pub fn surrogate_accuracy(
    rows: &[Vec<f64>],
    labels: &[bool],
    cols: &[usize],
    train: &[usize],
    test: &[usize],
    cfg: &SurrogateConfig,
) -> f64 {
    let n = train.len() as f64;
    let pos = train.iter().filter(|&&i| labels[i]).count() as f64;
    let neg = n - pos;
    let (wp, wn) = if pos == 0.0 || neg == 0.0 {
        (1.0, 1.0)
    } else {
        (n / (2.0 * pos), n / (2.0 * neg))
    };
    let mut w = vec![0.0; cols.len()];
    let mut b = 0.0;
    let z = |w: &[f64], b: f64, i: usize| b + cols.iter().zip(w).map(|(&c, wc)| wc * rows[i][c]).sum::<f64>();
    for _ in 0..cfg.epochs {
        let mut gw = vec![0.0; cols.len()];
        let mut gb = 0.0;
        for &i in train {
            let p = super::sigmoid(z(&w, b, i));
            let (y, cw) = if labels[i] { (1.0, wp) } else { (0.0, wn) };
            let e = cw * (p - y);
            for (g, &c) in gw.iter_mut().zip(cols) {
                *g += e * rows[i][c];
            }
            gb += e;
        }
        for (wc, g) in w.iter_mut().zip(&gw) {
            *wc -= cfg.learning_rate * g / n;
        }
        b -= cfg.learning_rate * gb / n;
    }
    if test.is_empty() {
        return 0.0;
    }
    let correct = test
        .iter()
        .filter(|&&i| (super::sigmoid(z(&w, b, i)) >= 0.5) == labels[i])
        .count();
    correct as f64 / test.len() as f64
}

/// `[1 - Acc, Stability, cost]` over the folds.
pub fn evaluate_objectives(
    bits: &[bool],
    rows: &[Vec<f64>],
    labels: &[bool],
    folds: &[Fold],
    cfg: &SurrogateConfig,
) -> Result<Vec<f64>, MooError> {
    let cols = selected(bits);
    if cols.is_empty() {
        return Err(MooError::EmptySelection);
    }
    let start = Instant::now();
    let accs: Vec<f64> = folds
        .iter()
        .map(|f| surrogate_accuracy(rows, labels, &cols, &f.train, &f.test, cfg))
        .collect();
    let (acc, stability) = accuracy_stability(&accs);
    let cost = if cfg.wall_clock {
        start.elapsed().as_secs_f64()
    } else {
        cols.len() as f64 / bits.len() as f64
    };
    Ok(vec![1.0 - acc, stability, cost])
}

/// Wrapper objective over a feature matrix and its folds.
pub struct WrapperObjective<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [bool],
    pub folds: &'a [Fold],
    pub config: SurrogateConfig,
}

impl Objective for WrapperObjective<'_> {
    fn n_genes(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    fn evaluate(&self, bits: &[bool]) -> Vec<f64> {
        // Optimizers repair genomes before evaluation.
        evaluate_objectives(bits, self.rows, self.labels, self.folds, &self.config)
            .expect("optimizer passed an empty selection")
    }
}
