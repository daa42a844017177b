use rand::Rng;

use super::pareto::dominates;
use super::{evaluate_all, random_bits, repair, sigmoid, Bits, MooError, MopsoConfig, Objective, OptimizationResult, OptimizerKind, ParetoArchive};
use crate::exec::{stream_rng, Execution};

/// One velocity component: `w v + c1 r1 (pbest - x) + c2 r2 (leader - x)`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(v: f64, x: f64, pbest: f64, leader: f64, w: f64, c1: f64, c2: f64, r1: f64, r2: f64) -> f64 {
    w * v + c1 * r1 * (pbest - x) + c2 * r2 * (leader - x)
}

/// Probability that a bit is set for velocity `v`.
pub fn bit_probability(v: f64) -> f64 {
    sigmoid(v)
}

fn as_f64(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Binary tournament on crowding distance; the lower index wins ties.
fn pick_leader<R: Rng + ?Sized>(crowd: &[f64], rng: &mut R) -> usize {
    let a = rng.random_range(0..crowd.len());
    let b = rng.random_range(0..crowd.len());
    if crowd[b] > crowd[a] || (crowd[b] == crowd[a] && b < a) {
        b
    } else {
        a
    }
}

struct Particle {
    x: Bits,
    v: Vec<f64>,
    best: Bits,
    best_obj: Vec<f64>,
}

pub fn mopso<O: Objective>(
    objective: &O,
    cfg: &MopsoConfig,
    seed: u64,
    exec: Execution,
) -> Result<OptimizationResult, MooError> {
    if cfg.population == 0 || cfg.iterations == 0 || cfg.archive_size == 0 {
        return Err(MooError::Config(format!(
            "mopso needs positive population, iterations and archive size (got {}, {}, {})",
            cfg.population, cfg.iterations, cfg.archive_size
        )));
    }
    if cfg.v_max <= 0.0 {
        return Err(MooError::Config("mopso velocity bound must be positive".into()));
    }
    let n = objective.n_genes();
    if n == 0 {
        return Err(MooError::Config("no features to select from".into()));
    }
    let p = cfg.population;
    let xs: Vec<Bits> = (0..p)
        .map(|i| random_bits(n, &mut stream_rng(seed, 0, i as u64)))
        .collect();
    let objs = evaluate_all(objective, &xs, exec);
    let mut evals = p as u64;
    let mut archive = ParetoArchive::new(cfg.archive_size);
    for (x, o) in xs.iter().zip(&objs) {
        archive.insert(x, o);
    }
    let mut swarm: Vec<Particle> = xs
        .into_iter()
        .zip(objs)
        .map(|(x, o)| Particle {
            best: x.clone(),
            best_obj: o,
            x,
            v: vec![0.0; n],
        })
        .collect();

    for t in 1..cfg.iterations {
        let crowd = archive.crowding();
        let leaders = archive.members();
        let moved: Vec<(Bits, Vec<f64>)> = exec.map_range(p, |i| {
            let mut rng = stream_rng(seed, t as u64, i as u64);
            let part = &swarm[i];
            let leader = &leaders[pick_leader(&crowd, &mut rng)].bits;
            let mut v = Vec::with_capacity(n);
            let mut x = Vec::with_capacity(n);
            #[allow(clippy::needless_range_loop)]
            for j in 0..n {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let vj = velocity_update(
                    part.v[j],
                    as_f64(part.x[j]),
                    as_f64(part.best[j]),
                    as_f64(leader[j]),
                    cfg.inertia,
                    cfg.c1,
                    cfg.c2,
                    r1,
                    r2,
                )
                .clamp(-cfg.v_max, cfg.v_max);
                v.push(vj);
                x.push(rng.random::<f64>() < bit_probability(vj));
            }
            repair(&mut x, &mut rng);
            (x, v)
        });
        let positions: Vec<Bits> = moved.iter().map(|(x, _)| x.clone()).collect();
        let objs = evaluate_all(objective, &positions, exec);
        evals += p as u64;

        for (i, ((x, v), o)) in moved.into_iter().zip(objs).enumerate() {
            let part = &mut swarm[i];
            let replace = if dominates(&o, &part.best_obj) {
                true
            } else if dominates(&part.best_obj, &o) {
                false
            } else {
                stream_rng(seed, t as u64, (p + i) as u64).random_bool(0.5)
            };
            if replace {
                part.best = x.clone();
                part.best_obj = o.clone();
            }
            archive.insert(&x, &o);
            part.x = x;
            part.v = v;
        }
    }

    Ok(OptimizationResult {
        optimizer: OptimizerKind::Mopso,
        archive: archive.sorted(),
        evaluation_count: evals,
        generations: cfg.iterations,
        wall_clock_s: None,
    })
}
