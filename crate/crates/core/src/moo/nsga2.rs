use std::cmp::Ordering;

use rand::Rng;

use super::operators::{fitness_scaled_mutation, uniform_crossover};
use super::pareto::{crowding_distance, front_ranks, non_dominated_sort};
use super::{evaluate_all, random_bits, repair, Bits, MooError, Nsga2Config, Objective, OptimizationResult, OptimizerKind, ParetoArchive};
use crate::exec::{stream_rng, Execution};

/// Per-member rank and crowding distance within its front.
fn rank_and_crowd(objs: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let fronts = non_dominated_sort(objs);
    let ranks = front_ranks(&fronts, objs.len());
    let mut crowd = vec![0.0; objs.len()];
    for front in &fronts {
        let sub: Vec<Vec<f64>> = front.iter().map(|&i| objs[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&sub)) {
            crowd[i] = d;
        }
    }
    (ranks, crowd)
}

/// Lower rank, then larger crowding, then lexicographically smaller genome.
fn crowded_cmp(a: usize, b: usize, ranks: &[usize], crowd: &[f64], bits: &[Bits]) -> Ordering {
    ranks[a]
        .cmp(&ranks[b])
        .then_with(|| crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal))
        .then_with(|| bits[a].cmp(&bits[b]))
}

/// Elitist survivor selection from a combined population. Repeated genomes
/// only fill slots left over after all distinct ones. Returns indices in
/// ascending order.
pub fn environmental_selection(objs: &[Vec<f64>], bits: &[Bits], keep: usize) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    let (unique, repeats): (Vec<usize>, Vec<usize>) =
        (0..bits.len()).partition(|&i| seen.insert(bits[i].clone()));
    let sub: Vec<Vec<f64>> = unique.iter().map(|&i| objs[i].clone()).collect();
    let mut chosen: Vec<usize> = select_distinct(&sub, &unique.iter().map(|&i| bits[i].clone()).collect::<Vec<_>>(), keep)
        .into_iter()
        .map(|k| unique[k])
        .collect();
    chosen.extend(repeats.into_iter().take(keep - chosen.len()));
    chosen.sort_unstable();
    chosen
}

fn select_distinct(objs: &[Vec<f64>], bits: &[Bits], keep: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(keep);
    for front in non_dominated_sort(objs) {
        if chosen.len() + front.len() <= keep {
            chosen.extend(front);
            continue;
        }
        let sub: Vec<Vec<f64>> = front.iter().map(|&i| objs[i].clone()).collect();
        let crowd = crowding_distance(&sub);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .unwrap_or(Ordering::Equal)
                .then_with(|| bits[front[a]].cmp(&bits[front[b]]))
        });
        let need = keep - chosen.len();
        chosen.extend(order[..need].iter().map(|&k| front[k]));
        break;
    }
    chosen
}

pub fn nsga2<O: Objective>(
    objective: &O,
    cfg: &Nsga2Config,
    seed: u64,
    exec: Execution,
) -> Result<OptimizationResult, MooError> {
    if cfg.population < 2 || cfg.generations == 0 {
        return Err(MooError::Config(format!(
            "nsga2 needs population >= 2 and generations >= 1 (got {} and {})",
            cfg.population, cfg.generations
        )));
    }
    if !(0.0..=1.0).contains(&cfg.crossover_prob) || !(0.0..=1.0).contains(&cfg.mutation_prob) {
        return Err(MooError::Config("nsga2 probabilities must lie in [0, 1]".into()));
    }
    let n = objective.n_genes();
    if n == 0 {
        return Err(MooError::Config("no features to select from".into()));
    }
    let p = cfg.population;
    let mut bits: Vec<Bits> = (0..p)
        .map(|i| random_bits(n, &mut stream_rng(seed, 0, i as u64)))
        .collect();
    let mut objs = evaluate_all(objective, &bits, exec);
    let mut evals = p as u64;

    for g in 1..=cfg.generations {
        let (ranks, crowd) = rank_and_crowd(&objs);
        let worst = *ranks.iter().max().unwrap_or(&0) as f64;
        let mut rng = stream_rng(seed, g as u64, u64::MAX);
        let tournament = |rng: &mut rand_chacha::ChaCha8Rng| {
            let a = rng.random_range(0..p);
            let b = rng.random_range(0..p);
            match crowded_cmp(a, b, &ranks, &crowd, &bits) {
                Ordering::Greater => b,
                _ => a,
            }
        };
        let mut kids: Vec<Bits> = Vec::with_capacity(p);
        while kids.len() < p {
            let a = tournament(&mut rng);
            let b = tournament(&mut rng);
            let (c1, c2) = if rng.random::<f64>() < cfg.crossover_prob {
                uniform_crossover(&bits[a], &bits[b], &mut rng)?
            } else {
                (bits[a].clone(), bits[b].clone())
            };
            for (child, parent) in [(c1, a), (c2, b)] {
                if kids.len() == p {
                    break;
                }
                // Fitness is the negated front rank, so front 0 is fittest.
                let f_i = -(ranks[parent] as f64);
                let mut m = fitness_scaled_mutation(&child, f_i, 0.0, -worst, cfg.mutation_prob, &mut rng);
                repair(&mut m, &mut rng);
                kids.push(m);
            }
        }
        let kid_objs = evaluate_all(objective, &kids, exec);
        evals += p as u64;

        bits.extend(kids);
        objs.extend(kid_objs);
        let keep = environmental_selection(&objs, &bits, p);
        bits = keep.iter().map(|&i| bits[i].clone()).collect();
        objs = keep.iter().map(|&i| objs[i].clone()).collect();
    }

    let mut archive = ParetoArchive::new(p);
    for &i in &non_dominated_sort(&objs)[0] {
        archive.insert(&bits[i], &objs[i]);
    }
    Ok(OptimizationResult {
        optimizer: OptimizerKind::Nsga2,
        archive: archive.sorted(),
        evaluation_count: evals,
        generations: cfg.generations,
        wall_clock_s: None,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::super::pareto::dominates;
    use super::super::stubs::Toy;
    use super::*;

    struct Recording {
        inner: Toy,
        seen: Mutex<Vec<(Bits, Vec<f64>)>>,
    }

    impl Objective for Recording {
        fn n_genes(&self) -> usize {
            self.inner.n
        }

        fn evaluate(&self, bits: &[bool]) -> Vec<f64> {
            let o = self.inner.evaluate(bits);
            self.seen.lock().unwrap().push((bits.to_vec(), o.clone()));
            o
        }
    }

    #[test]
    fn one_generation_matches_brute_force_filter() {
        let obj = Recording {
            inner: Toy { n: 6 },
            seen: Mutex::new(Vec::new()),
        };
        let cfg = Nsga2Config {
            population: 4,
            generations: 1,
            ..Default::default()
        };
        let r = nsga2(&obj, &cfg, 11, Execution::Sequential).unwrap();
        let seen = obj.seen.into_inner().unwrap();
        assert_eq!(seen.len(), 8);
        let mut oracle: Vec<(Bits, Vec<f64>)> = seen
            .iter()
            .filter(|(_, o)| !seen.iter().any(|(_, q)| dominates(q, o)))
            .cloned()
            .collect();
        oracle.sort_by(|a, b| a.0.cmp(&b.0));
        oracle.dedup_by(|a, b| a.0 == b.0);
        let got: Vec<(Bits, Vec<f64>)> = r
            .archive
            .members()
            .iter()
            .map(|m| (m.bits.clone(), m.objectives.clone()))
            .collect();
        if oracle.len() <= 4 {
            assert_eq!(got, oracle);
        } else {
            assert_eq!(got.len(), 4);
            assert!(got.iter().all(|g| oracle.contains(g)));
        }
    }

    #[test]
    fn zero_population_rejected() {
        let cfg = Nsga2Config {
            population: 0,
            ..Default::default()
        };
        assert!(matches!(
            nsga2(&Toy { n: 4 }, &cfg, 0, Execution::Sequential),
            Err(MooError::Config(_))
        ));
    }

    #[test]
    fn deterministic_and_non_dominated() {
        let cfg = Nsga2Config {
            population: 20,
            generations: 10,
            ..Default::default()
        };
        let a = nsga2(&Toy { n: 10 }, &cfg, 3, Execution::Parallel).unwrap();
        let b = nsga2(&Toy { n: 10 }, &cfg, 3, Execution::Sequential).unwrap();
        assert_eq!(a.archive, b.archive);
        assert!(a.archive.is_mutually_non_dominated());
        assert_eq!(a.evaluation_count, 20 + 20 * 10);
    }
}
