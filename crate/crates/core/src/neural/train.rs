use serde::{Deserialize, Serialize};

use super::{bce_loss, Network, NeuralError};
use crate::exec::Execution;

/// Samples per gradient chunk. Chunks are summed in index order, so the
/// result does not depend on the worker count.
const CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerRule {
    Adam,
    /// `theta -= lr * grad`.
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub rule: OptimizerRule,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub record_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.001,
            rule: OptimizerRule::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub epoch: usize,
    pub loss: f64,
}

/// Mean BCE plus `l2 * ||theta||^2`, and its gradient.
pub fn loss_and_grad<N: Network>(
    params: &N,
    xs: &[N::Input],
    ys: &[bool],
    l2: f64,
    exec: Execution,
) -> (f64, N) {
    let n = xs.len();
    let scale = 1.0 / n as f64;
    let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let parts = exec.map(&starts, |&s| {
        let mut g = params.zeros_like();
        let mut ps = Vec::with_capacity(CHUNK);
        for i in s..(s + CHUNK).min(n) {
            let y = if ys[i] { 1.0 } else { 0.0 };
            ps.push(params.accumulate(&xs[i], y, scale, &mut g));
        }
        (ps, g)
    });
    let mut grad = params.zeros_like();
    let mut preds = Vec::with_capacity(n);
    for (ps, g) in parts {
        preds.extend(ps);
        grad.add_assign(&g);
    }
    if l2 != 0.0 {
        for (gt, pt) in grad.tensors_mut().into_iter().zip(params.tensors()) {
            for (g, p) in gt.iter_mut().zip(pt) {
                *g += 2.0 * l2 * p;
            }
        }
    }
    let labels: Vec<f64> = ys.iter().map(|&y| if y { 1.0 } else { 0.0 }).collect();
    let loss = bce_loss(&preds, &labels, l2 * params.squared_norm()).expect("labels are 0/1");
    (loss, grad)
}

struct Adam<N> {
    m: N,
    v: N,
    t: i32,
}

/// Full-batch training. Returns the trained parameters and the loss logged
/// every `record_every` epochs (evaluated before that epoch's update).
pub fn train<N: Network>(
    init: N,
    xs: &[N::Input],
    ys: &[bool],
    l2: f64,
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<(N, Vec<LossPoint>), NeuralError> {
    if xs.len() != ys.len() {
        return Err(NeuralError::ShapeMismatch(format!("{} inputs, {} labels", xs.len(), ys.len())));
    }
    if !ys.iter().any(|&y| y) || ys.iter().all(|&y| y) {
        return Err(NeuralError::DegenerateLabels);
    }
    let mut params = init;
    let mut adam = Adam {
        m: params.zeros_like(),
        v: params.zeros_like(),
        t: 0,
    };
    let mut curve = Vec::new();
    for epoch in 1..=cfg.epochs {
        let (loss, grad) = loss_and_grad(&params, xs, ys, l2, exec);
        if cfg.record_every > 0 && epoch % cfg.record_every == 0 {
            curve.push(LossPoint { epoch, loss });
        }
        match cfg.rule {
            OptimizerRule::Sgd => {
                for (p, g) in params.tensors_mut().into_iter().zip(grad.tensors()) {
                    for (x, d) in p.iter_mut().zip(g) {
                        *x -= cfg.learning_rate * d;
                    }
                }
            }
            OptimizerRule::Adam => {
                adam.t += 1;
                let c1 = 1.0 - cfg.beta1.powi(adam.t);
                let c2 = 1.0 - cfg.beta2.powi(adam.t);
                let ps = params.tensors_mut();
                let ms = adam.m.tensors_mut();
                let vs = adam.v.tensors_mut();
                for (((p, g), m), v) in ps.into_iter().zip(grad.tensors()).zip(ms).zip(vs) {
                    for i in 0..p.len() {
                        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                        p[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.epsilon);
                    }
                }
            }
        }
        if !params.all_finite() {
            return Err(NeuralError::NonFinite(format!("parameters diverged at epoch {epoch}")));
        }
    }
    Ok((params, curve))
}
