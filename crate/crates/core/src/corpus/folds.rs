use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split over labeled instances.
///
/// Positives are shuffled and dealt round-robin first, then negatives continue
/// the deal, so every fold gets a positive while positives last and fold sizes
/// differ by at most one.
pub fn split_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>, CorpusError> {
    if k < 2 {
        return Err(CorpusError::InvalidFoldCount(k));
    }
    if labels.len() < k {
        return Err(CorpusError::TooFewInstances {
            instances: labels.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut tests = vec![Vec::new(); k];
    for (slot, idx) in pos.into_iter().chain(neg).enumerate() {
        tests[slot % k].push(idx);
    }
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = (0..labels.len())
                .filter(|i| test.binary_search(i).is_err())
                .collect();
            Fold { train, test }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn leave_one_out() {
        let folds = split_folds(&[false; 10], 10, 3).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.test.len() == 1 && f.train.len() == 9));
    }

    #[test]
    fn balanced_sizes_for_434() {
        let labels: Vec<bool> = (0..434).map(|i| i % 17 == 0).collect();
        let folds = split_folds(&labels, 10, 1).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn stratified_when_possible() {
        let mut labels = vec![false; 50];
        for i in [3, 9, 20, 41, 42] {
            labels[i] = true;
        }
        let folds = split_folds(&labels, 5, 0).unwrap();
        assert!(folds.iter().all(|f| f.test.iter().any(|&i| labels[i])));
    }

    #[test]
    fn errors() {
        assert!(matches!(split_folds(&[true; 3], 4, 0), Err(CorpusError::TooFewInstances { .. })));
        assert!(matches!(split_folds(&[true; 3], 1, 0), Err(CorpusError::InvalidFoldCount(1))));
    }

    proptest! {
        #[test]
        fn folds_partition_instances(labels in prop::collection::vec(any::<bool>(), 2..120), k in 2usize..12, seed: u64) {
            prop_assume!(labels.len() >= k);
            let folds = split_folds(&labels, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for f in &folds {
                prop_assert_eq!(f.train.len() + f.test.len(), labels.len());
            }
            prop_assert_eq!(folds, split_folds(&labels, k, seed).unwrap());
        }
    }
}
