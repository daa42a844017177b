use rand::seq::index::sample;
use rand::Rng;

use super::pareto::dominates;
use super::{evaluate_all, repair, sigmoid, Bits, MooError, ModeConfig, Objective, OptimizationResult, OptimizerKind, ParetoArchive};
use crate::exec::{stream_rng, Execution};

/// DE/rand/1 mutant `x_a + F (x_b - x_c)`.
pub fn de_mutant(xa: &[f64], xb: &[f64], xc: &[f64], f: f64) -> Vec<f64> {
    xa.iter()
        .zip(xb.iter().zip(xc))
        .map(|(a, (b, c))| a + f * (b - c))
        .collect()
}

/// Binomial crossover of `target` with `mutant`; locus `j_rand` always takes
/// the mutant.
pub fn binomial_crossover<R: Rng + ?Sized>(target: &[f64], mutant: &[f64], cr: f64, j_rand: usize, rng: &mut R) -> Vec<f64> {
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| if j == j_rand || rng.random::<f64>() < cr { m } else { t })
        .collect()
}

/// Bit `j` is set when `sigmoid(u_j)` exceeds a uniform draw.
pub fn threshold<R: Rng + ?Sized>(u: &[f64], rng: &mut R) -> Bits {
    u.iter().map(|&x| sigmoid(x) > rng.random::<f64>()).collect()
}

pub fn mode<O: Objective>(
    objective: &O,
    cfg: &ModeConfig,
    seed: u64,
    exec: Execution,
) -> Result<OptimizationResult, MooError> {
    if cfg.population < 4 || cfg.generations == 0 || cfg.archive_size == 0 {
        return Err(MooError::Config(format!(
            "mode needs population >= 4 and positive generations and archive size (got {}, {}, {})",
            cfg.population, cfg.generations, cfg.archive_size
        )));
    }
    if !(0.0..=1.0).contains(&cfg.crossover_rate) {
        return Err(MooError::Config("mode crossover rate must lie in [0, 1]".into()));
    }
    let n = objective.n_genes();
    if n == 0 {
        return Err(MooError::Config("no features to select from".into()));
    }
    let p = cfg.population;
    let init: Vec<(Vec<f64>, Bits)> = (0..p)
        .map(|i| {
            let mut rng = stream_rng(seed, 0, i as u64);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut bits = threshold(&x, &mut rng);
            repair(&mut bits, &mut rng);
            (x, bits)
        })
        .collect();
    let (mut xs, mut bits): (Vec<Vec<f64>>, Vec<Bits>) = init.into_iter().unzip();
    let mut objs = evaluate_all(objective, &bits, exec);
    let mut evals = p as u64;
    let mut archive = ParetoArchive::new(cfg.archive_size);
    for (b, o) in bits.iter().zip(&objs) {
        archive.insert(b, o);
    }

    for g in 1..=cfg.generations {
        let trials: Vec<(Vec<f64>, Bits)> = exec.map_range(p, |i| {
            let mut rng = stream_rng(seed, g as u64, i as u64);
            let others: Vec<usize> = sample(&mut rng, p - 1, 3)
                .into_iter()
                .map(|k| if k >= i { k + 1 } else { k })
                .collect();
            let v = de_mutant(&xs[others[0]], &xs[others[1]], &xs[others[2]], cfg.scale_factor);
            let j_rand = rng.random_range(0..n);
            let u = binomial_crossover(&xs[i], &v, cfg.crossover_rate, j_rand, &mut rng);
            let mut b = threshold(&u, &mut rng);
            repair(&mut b, &mut rng);
            (u, b)
        });
        let trial_bits: Vec<Bits> = trials.iter().map(|(_, b)| b.clone()).collect();
        let trial_objs = evaluate_all(objective, &trial_bits, exec);
        evals += p as u64;

        for (i, ((u, b), o)) in trials.into_iter().zip(trial_objs).enumerate() {
            if dominates(&o, &objs[i]) {
                archive.insert(&b, &o);
                xs[i] = u;
                bits[i] = b;
                objs[i] = o;
            } else if !dominates(&objs[i], &o) {
                archive.insert(&b, &o);
            }
        }
    }

    Ok(OptimizationResult {
        optimizer: OptimizerKind::Mode,
        archive: archive.sorted(),
        evaluation_count: evals,
        generations: cfg.generations,
        wall_clock_s: None,
    })
}
