use std::cmp::Ordering;

use super::MetricsError;

/// Ranks by descending score; tied scores share the mean of their positions.
pub fn rank_statements(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Positions i+1..=j, mean = (i + 1 + j) / 2.
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        i = j;
    }
    ranks
}

/// Mann-Whitney AUC as an exact fraction `numerator / denominator`, both in
/// half-pair units: a won pair counts 2, a tie 1, over `2 * P * N`.
pub fn auc_half_counts(scores: &[f64], labels: &[bool]) -> Result<(u64, u64), MetricsError> {
    let p = labels.iter().filter(|&&l| l).count() as u64;
    let n = labels.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(MetricsError::SingleClass);
    }
    // Ascending midranks doubled so every value is an integer.
    let asc = rank_statements(&scores.iter().map(|s| -s).collect::<Vec<_>>());
    let twice_rank_sum: u64 = asc
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| (r * 2.0).round() as u64)
        .sum();
    Ok((twice_rank_sum - p * (p + 1), 2 * p * n))
}

pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    let (num, den) = auc_half_counts(scores, labels)?;
    Ok(num as f64 / den as f64)
}

/// Best and mean rank of one fault's statements.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FaultRank {
    pub first: f64,
    pub average: f64,
}

pub fn fault_rank(ranks: &[f64], faulty: &[usize]) -> Result<FaultRank, MetricsError> {
    if faulty.is_empty() {
        return Err(MetricsError::NoFaults);
    }
    let rs: Vec<f64> = faulty.iter().map(|&i| ranks[i]).collect();
    Ok(FaultRank {
        first: rs.iter().copied().fold(f64::INFINITY, f64::min),
        average: rs.iter().sum::<f64>() / rs.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TopN {
    pub top1: usize,
    pub top3: usize,
    pub top5: usize,
    pub mar: f64,
    pub mfr: f64,
    pub faults: usize,
}

pub fn topn_mar_mfr(faults: &[FaultRank]) -> Result<TopN, MetricsError> {
    if faults.is_empty() {
        return Err(MetricsError::NoFaults);
    }
    let within = |n: f64| faults.iter().filter(|f| f.first <= n).count();
    let n = faults.len() as f64;
    Ok(TopN {
        top1: within(1.0),
        top3: within(3.0),
        top5: within(5.0),
        mar: faults.iter().map(|f| f.average).sum::<f64>() / n,
        mfr: faults.iter().map(|f| f.first).sum::<f64>() / n,
        faults: faults.len(),
    })
}

/// Mean and population standard deviation of per-fold accuracies.
pub fn accuracy_stability(accs: &[f64]) -> (f64, f64) {
    if accs.is_empty() {
        return (0.0, 0.0);
    }
    let n = accs.len() as f64;
    let mean = accs.iter().sum::<f64>() / n;
    let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    /// Predictions at or above `threshold` count as faulty.
    pub fn from_scores(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut m = ConfusionMatrix::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l) {
                (true, true) => m.tp += 1,
                (true, false) => m.fp += 1,
                (false, false) => m.tn += 1,
                (false, true) => m.fn_ += 1,
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `(TP + TN) / total`; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }
}
