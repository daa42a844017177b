//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use faultfuse::corpus::{generate_synthetic, split_folds, SyntheticSpec, Template};
use faultfuse::features::assemble_features;
use faultfuse::fusion::{order_by_weight, vote, Ballot};
use faultfuse::metrics::{accuracy_stability, auc, auc_half_counts, fault_rank, rank_statements, topn_mar_mfr};
use faultfuse::moo::{
    crowding_distance, dominates, fitness_scaled_mutation, non_dominated_sort, optimize, uniform_crossover,
    OptimizerConfig, OptimizerKind, ParetoArchive, SurrogateConfig, WrapperObjective,
};
use faultfuse::neural::{loss_and_grad, GruLayer, GruParams, MlpParams, ModelKind, Network, Params};
use faultfuse::pipeline::{run_pipeline, RunConfig};
use faultfuse::static_analysis::count_text_features;
use faultfuse::Execution;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const MEDIAN_SOURCE: &str = "int x, y, z, m;
input x, y, z;
m = z;
if (y < z)
    if (x < y)
        m = y;
    else if (x < z)
        m = y; //bug
else
    if (x > y)
        m = y;
    else if (x > z)
        m = x;
print(\u{201c}Median:\u{201d}, m);";

/// (branch paths, variables, symbols) per statement.
const MEDIAN_EXPECTED: [(usize, usize, usize); 14] = [
    (3, 4, 4),
    (3, 3, 3),
    (3, 2, 2),
    (3, 2, 3),
    (2, 2, 3),
    (1, 2, 2),
    (2, 2, 3),
    (1, 2, 2),
    (3, 0, 0),
    (2, 2, 3),
    (1, 2, 2),
    (2, 2, 3),
    (1, 2, 2),
    (3, 1, 7),
];

fn median_text_features() -> Outcome {
    let f = count_text_features(MEDIAN_SOURCE).map_err(|e| e.to_string())?;
    check(f.lines.len() == 14, format!("{} statements parsed", f.lines.len()))?;
    let mut matched = 0;
    for (i, (lf, exp)) in f.lines.iter().zip(MEDIAN_EXPECTED).enumerate() {
        let got = (lf.branch_paths, lf.variables, lf.symbols);
        check(got == exp, format!("S{i}: got {got:?}, expected {exp:?}"))?;
        matched += 3;
    }
    Ok(format!("{matched}/42 values exact"))
}

fn fusion_examples() -> Outcome {
    let ballots = [
        Ballot::new([1, 4, 6], 1.0),
        Ballot::new([2, 4], 1.0),
        Ballot::new([2, 4, 6], 1.0),
    ];
    let chosen = vote(&ballots, 3).map_err(|e| e.to_string())?;
    check(chosen == BTreeSet::from([2, 4, 6]), format!("vote gave {chosen:?}"))?;
    let order: Vec<usize> = order_by_weight(vec![(2, 0.5), (4, 1.0), (6, 1.5)])
        .into_iter()
        .map(|(f, _)| f)
        .collect();
    check(order == [6, 4, 2], format!("weight order {order:?}"))?;
    Ok("vote {f2,f4,f6}, order {f6,f4,f2}".into())
}

fn operator_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let len = 17;
    for _ in 0..10_000 {
        let p1: Vec<bool> = (0..len).map(|_| rng.random()).collect();
        let p2: Vec<bool> = (0..len).map(|_| rng.random()).collect();
        let (c1, c2) = uniform_crossover(&p1, &p2, &mut rng).map_err(|e| e.to_string())?;
        for i in 0..len {
            let mut a = [p1[i], p2[i]];
            let mut b = [c1[i], c2[i]];
            a.sort();
            b.sort();
            check(a == b, format!("locus {i} not conserved"))?;
        }
    }
    let (ones, zeros) = (vec![true; len], vec![false; len]);
    let mut inherited = 0usize;
    for _ in 0..10_000 {
        let (c1, _) = uniform_crossover(&ones, &zeros, &mut rng).map_err(|e| e.to_string())?;
        inherited += c1.iter().filter(|&&b| b).count();
    }
    let rate = inherited as f64 / (10_000 * len) as f64;
    check((rate - 0.5).abs() <= 0.02, format!("inheritance rate {rate}"))?;

    let bits = vec![false; 1];
    let mut full = 0usize;
    let mut mid = 0usize;
    for _ in 0..10_000 {
        full += fitness_scaled_mutation(&bits, 0.0, 1.0, 0.0, 1.0, &mut rng)[0] as usize;
        mid += fitness_scaled_mutation(&bits, 0.5, 1.0, 0.0, 1.0, &mut rng)[0] as usize;
    }
    check(full == 10_000, format!("flip rate at f_min {}", full as f64 / 1e4))?;
    let mid_rate = mid as f64 / 1e4;
    check((mid_rate - 0.5).abs() <= 0.02, format!("flip rate at midpoint {mid_rate}"))?;
    Ok(format!("inheritance {rate:.4}, flip at f_min 1.0, at midpoint {mid_rate:.4}"))
}

/// Points on the plane x+y+z = 1 with positive coordinates are mutually
/// non-dominated.
fn simplex_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let a: f64 = rng.random_range(0.01..1.0);
    let b: f64 = rng.random_range(0.01..1.0);
    let c: f64 = rng.random_range(0.01..1.0);
    let s = a + b + c;
    vec![a / s, b / s, c / s]
}

fn crowding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let n = rng.random_range(1..30);
        let m = rng.random_range(1..4);
        let front: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect();
        let d = crowding_distance(&front);
        #[allow(clippy::needless_range_loop)]
        for j in 0..m {
            let lo = (0..n).min_by(|&a, &b| front[a][j].total_cmp(&front[b][j])).unwrap();
            let hi = (0..n).max_by(|&a, &b| front[a][j].total_cmp(&front[b][j])).unwrap();
            check(d[lo].is_infinite() && d[hi].is_infinite(), "finite boundary distance")?;
        }
    }
    let d = crowding_distance(&[vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]);
    check((d[1] - 2.0).abs() <= 1e-12, format!("interior distance {}", d[1]))?;

    for trial in 0..1000u64 {
        let cap = rng.random_range(6..20);
        let mut archive = ParetoArchive::new(cap);
        let points: Vec<Vec<f64>> = (0..rng.random_range(cap..60)).map(|_| simplex_point(&mut rng)).collect();
        for (i, p) in points.iter().enumerate() {
            let bits: Vec<bool> = (0..8).map(|b| (i >> b) & 1 == 1).collect();
            archive.insert(&bits, p);
        }
        for j in 0..3 {
            for extreme in [
                points.iter().min_by(|a, b| a[j].total_cmp(&b[j])).unwrap(),
                points.iter().max_by(|a, b| a[j].total_cmp(&b[j])).unwrap(),
            ] {
                check(
                    archive.members().iter().any(|m| &m.objectives == extreme),
                    format!("archive {trial} dropped a boundary member"),
                )?;
            }
        }
    }
    Ok(format!("interior {:.12}, boundaries kept in 1000 archives", d[1]))
}

fn brute_fronts(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&objs[j], &objs[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn mutually_non_dominated(a: &ParetoArchive) -> bool {
    let m = a.members();
    m.iter()
        .all(|x| m.iter().all(|y| !dominates(&x.objectives, &y.objectives)))
}

fn pareto_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..100 {
        let n = rng.random_range(1..=50);
        let objs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(0..6) as f64).collect())
            .collect();
        let mut got = non_dominated_sort(&objs);
        got.iter_mut().for_each(|f| f.sort());
        check(got == brute_fronts(&objs), format!("population {k}: fronts differ"))?;
    }
    let d = generate_synthetic(&SyntheticSpec::new(Template::Median3, 100, 7)).map_err(|e| e.to_string())?;
    let m = assemble_features(&d).map_err(|e| e.to_string())?;
    let labels = d.labels();
    let folds = split_folds(&labels, 10, 7).map_err(|e| e.to_string())?;
    let objective = WrapperObjective {
        rows: &m.rows,
        labels: &labels,
        folds: &folds,
        config: SurrogateConfig::default(),
    };
    let mut sizes = Vec::new();
    for kind in OptimizerKind::ALL {
        let r = optimize(kind, &objective, &OptimizerConfig::default(), 7, Execution::Parallel, false)
            .map_err(|e| e.to_string())?;
        check(!r.archive.is_empty(), format!("{kind}: empty archive"))?;
        check(mutually_non_dominated(&r.archive), format!("{kind}: archive fails audit"))?;
        sizes.push(format!("{kind} {}", r.archive.len()));
    }
    Ok(format!("100 populations match brute force; archives audited ({})", sizes.join(", ")))
}

fn randomize<P: Params>(p: &mut P, rng: &mut ChaCha8Rng) {
    for t in p.tensors_mut() {
        t.iter_mut().for_each(|x| *x = rng.random_range(-0.8..0.8));
    }
}

fn worst_relative_error<N: Network>(params: &N, xs: &[N::Input], ys: &[bool], l2: f64) -> f64 {
    let (_, grad) = loss_and_grad(params, xs, ys, l2, Execution::Sequential);
    let analytic: Vec<f64> = grad.tensors().iter().flat_map(|t| t.to_vec()).collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for ti in 0..params.tensors().len() {
        for j in 0..params.tensors()[ti].len() {
            let mut plus = params.clone();
            plus.tensors_mut()[ti][j] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[ti][j] -= h;
            let numeric = (loss_and_grad(&plus, xs, ys, l2, Execution::Sequential).0
                - loss_and_grad(&minus, xs, ys, l2, Execution::Sequential).0)
                / (2.0 * h);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[k] - numeric).abs() / scale);
            k += 1;
        }
    }
    worst
}

fn gradient_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut m = MlpParams::zeros(3, 4);
        randomize(&mut m, &mut rng);
        let xs: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ys = [true, false, true, false, false, true];
        worst = worst.max(worst_relative_error(&m, &xs, &ys, 0.0));

        let mut g = GruParams::zeros(2, 3, 2);
        randomize(&mut g, &mut rng);
        let xs: Vec<Vec<Vec<f64>>> = (0..4)
            .map(|_| (0..3).map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
            .collect();
        worst = worst.max(worst_relative_error(&g, &xs, &[true, false, false, true], 1e-4));
    }
    check(worst < 1e-4, format!("relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e} over 20 instances"))
}

fn gru_gates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let norm = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    for _ in 0..200 {
        let mut layer = GruLayer::init(3, 4, &mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = layer.cell(&x, &h);
        for i in 0..4 {
            let (lo, hi) = if t.h_prev[i] <= t.candidate[i] {
                (t.h_prev[i], t.candidate[i])
            } else {
                (t.candidate[i], t.h_prev[i])
            };
            check(lo <= t.h[i] && t.h[i] <= hi, "h outside [h_prev, candidate]")?;
        }
        layer.b_z.iter_mut().for_each(|b| *b = -60.0);
        let t = layer.cell(&x, &h);
        check(norm(&t.h, &t.h_prev) < 1e-6, "z -> 0 does not keep h_prev")?;
        layer.b_z.iter_mut().for_each(|b| *b = 60.0);
        let t = layer.cell(&x, &h);
        check(norm(&t.h, &t.candidate) < 1e-6, "z -> 1 does not take candidate")?;
    }
    Ok("200 random cells: copy, replace and convexity hold".into())
}

fn metrics_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..1000 {
        let n = rng.random_range(2..40);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64 / 8.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        let (num, den) = auc_half_counts(&scores, &labels).map_err(|e| e.to_string())?;
        let mut half_wins = 0u64;
        let mut pairs = 0u64;
        for i in (0..n).filter(|&i| labels[i]) {
            for j in (0..n).filter(|&j| !labels[j]) {
                half_wins += if scores[i] > scores[j] { 2 } else { (scores[i] == scores[j]) as u64 };
                pairs += 1;
            }
        }
        check(num == half_wins && den == 2 * pairs, format!("instance {k}: AUC differs from pairwise count"))?;
        let a = auc(&scores, &labels).map_err(|e| e.to_string())?;
        check(a == half_wins as f64 / (2 * pairs) as f64, format!("instance {k}: AUC value"))?;
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let (fnum, fden) = auc_half_counts(&scores, &flipped).map_err(|e| e.to_string())?;
        check(fden == den && num + fnum == den, format!("instance {k}: antisymmetry"))?;
    }
    for k in 0..1000 {
        let n = rng.random_range(1..30);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..10) as f64 / 4.0).collect();
        let faulty: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.2)).collect();
        let faulty = if faulty.is_empty() { vec![0] } else { faulty };
        let shifted: Vec<f64> = scores.iter().map(|s| s + 3.0).collect();
        let r = rank_statements(&scores);
        check(r == rank_statements(&shifted), format!("vector {k}: shift changed ranks"))?;
        let t = topn_mar_mfr(&[fault_rank(&r, &faulty).map_err(|e| e.to_string())?]).map_err(|e| e.to_string())?;
        check(t.top1 <= t.top3 && t.top3 <= t.top5, format!("vector {k}: Top-N not monotone"))?;
        check(t.mar >= t.mfr, format!("vector {k}: MAR < MFR"))?;
    }
    let (_, s) = accuracy_stability(&[0.8, 1.0]);
    check((s - 0.1).abs() <= 1e-12, format!("stability {s}"))?;
    Ok(format!("1000 AUC instances exact, 1000 rank vectors invariant, stability {s:.12}"))
}

fn synthetic_sources() -> Vec<String> {
    let mut ds = Vec::new();
    ds.extend((1..=7).map(|s| format!("median3:{s}")));
    ds.extend((1..=7).map(|s| format!("triangle:{s}")));
    ds.extend((1..=6).map(|s| format!("maxarray:{s}")));
    ds
}

fn end_to_end(scratch: &Path) -> Outcome {
    let cfg = RunConfig {
        datasets: synthetic_sources(),
        optimizer: OptimizerKind::Mopso,
        model: ModelKind::Rnn,
        out_dir: scratch.join("localization"),
        ..Default::default()
    };
    let s = run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let rnn = s.reports.aggregate("rnn").ok_or("no rnn aggregate")?;
    let tarantula = s.reports.aggregate("tarantula").ok_or("no tarantula aggregate")?;
    let top3 = rnn.loc_acc(3);
    let line = format!(
        "top-3 {}/{} ({:.0}%), mean MFR {:.3} vs tarantula {:.3}",
        rnn.top3,
        rnn.faults,
        top3 * 100.0,
        rnn.mfr,
        tarantula.mfr
    );
    check(rnn.faults == 20, format!("{} faults evaluated", rnn.faults))?;
    check(top3 >= 0.8, line.clone())?;
    check(rnn.mfr < tarantula.mfr, line.clone())?;
    Ok(line)
}

fn evaluation_counts(scratch: &Path) -> Outcome {
    let mut counts = Vec::new();
    let mut walls = Vec::new();
    for kind in [OptimizerKind::Mopso, OptimizerKind::Nsga2] {
        let cfg = RunConfig {
            datasets: vec!["median3:7".into()],
            optimizer: kind,
            model: ModelKind::Mlp,
            wall_clock: true,
            out_dir: scratch.join(format!("counts-{kind}")),
            ..Default::default()
        };
        let s = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        counts.push(s.evals.evaluation_count);
        walls.push(s.evals.wall_clock_s.ok_or("wall clock missing")?);
    }
    let line = format!(
        "evaluations mopso {} < nsga2 {}; wall {:.2}s < {:.2}s",
        counts[0], counts[1], walls[0], walls[1]
    );
    check(counts[0] < counts[1], line.clone())?;
    check(walls[0] < walls[1], line.clone())?;
    Ok(line)
}

fn determinism(scratch: &Path) -> Outcome {
    let mut n = 0;
    for kind in OptimizerKind::ALL {
        for model in ModelKind::ALL {
            let mut bytes = Vec::new();
            for run in 0..2 {
                let cfg = RunConfig {
                    datasets: vec!["median3:7".into()],
                    optimizer: kind,
                    model,
                    out_dir: scratch.join(format!("det-{kind}-{model}-{run}")),
                    ..Default::default()
                };
                run_pipeline(&cfg).map_err(|e| format!("{kind}/{model}: {e}"))?;
                bytes.push(fs::read(cfg.out_dir.join("report.json")).map_err(|e| e.to_string())?);
            }
            check(bytes[0] == bytes[1], format!("{kind}/{model}: report.json differs"))?;
            n += 1;
        }
    }
    Ok(format!("{n} optimizer x model pairs byte-identical"))
}

type Criterion<'a> = (&'a str, Duration, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temp dir");
    let dir = scratch.path();
    let secs = Duration::from_secs;
    let criteria: Vec<Criterion> = vec![
        ("median program text features", secs(1), Box::new(median_text_features)),
        ("voting and weighting examples", secs(1), Box::new(fusion_examples)),
        ("crossover and mutation operators", secs(10), Box::new(operator_properties)),
        ("crowding distance and truncation", secs(10), Box::new(crowding)),
        ("non-dominated sorting and archive audit", secs(30), Box::new(pareto_correctness)),
        ("MLP and GRU gradients", secs(30), Box::new(gradient_oracle)),
        ("GRU gate identities", secs(30), Box::new(gru_gates)),
        ("ranking and AUC oracles", secs(30), Box::new(metrics_oracles)),
        ("end-to-end localization on 20 datasets", secs(600), Box::new(|| end_to_end(dir))),
        ("MOPSO vs NSGA-II evaluation budget", secs(300), Box::new(|| evaluation_counts(dir))),
        ("run determinism across optimizers and models", secs(300), Box::new(|| determinism(dir))),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("[PASS] {:>2} {name}: {msg} ({took:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {msg} ({took:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
