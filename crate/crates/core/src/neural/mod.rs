//! MLP and GRU suspiciousness models with hand-derived gradients.

pub mod gru;
pub mod inputs;
pub mod mlp;
pub mod tensor;
pub mod train;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::fusion::FusedFeatureSet;

pub use gru::{GruLayer, GruParams, Sequence};
pub use inputs::{mlp_input, sequence_input, MlpInputMode};
pub use mlp::MlpParams;
pub use tensor::{Matrix, Params};
pub use train::{loss_and_grad, train, LossPoint, OptimizerRule, TrainConfig};

/// Probability clamp used by the loss.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("label {0} is not 0 or 1")]
    LabelOutOfRange(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("model has not been trained")]
    UntrainedModel,
    #[error("unknown model {0:?} (expected mlp or rnn)")]
    UnknownModel(String),
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean binary cross-entropy plus a precomputed penalty term.
pub fn bce_loss(predictions: &[f64], labels: &[f64], penalty: f64) -> Result<f64, NeuralError> {
    let mut total = 0.0;
    for (&p, &y) in predictions.iter().zip(labels) {
        if y != 0.0 && y != 1.0 {
            return Err(NeuralError::LabelOutOfRange(y));
        }
        let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
        total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    Ok(total / predictions.len().max(1) as f64 + penalty)
}

/// A trainable binary scorer.
pub trait Network: Params {
    type Input: Sync;

    fn predict(&self, x: &Self::Input) -> f64;

    /// Adds `scale * dBCE/dtheta` for one sample into `g`; returns the
    /// prediction.
    fn accumulate(&self, x: &Self::Input, y: f64, scale: f64, g: &mut Self) -> f64;

    fn output_bias_mut(&mut self) -> &mut f64;

    /// Sets the output bias to the log-odds of the positive rate so that
    /// training starts from calibrated predictions.
    fn set_prior(&mut self, labels: &[bool]) {
        let pos = labels.iter().filter(|&&l| l).count() as f64;
        let n = labels.len() as f64;
        if pos > 0.0 && pos < n {
            *self.output_bias_mut() = (pos / (n - pos)).ln();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Rnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Mlp, ModelKind::Rnn];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Rnn => "rnn",
        })
    }
}

impl FromStr for ModelKind {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mlp" => Ok(ModelKind::Mlp),
            "rnn" => Ok(ModelKind::Rnn),
            _ => Err(NeuralError::UnknownModel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub mlp_hidden: usize,
    pub mlp_l2: f64,
    pub mlp_inputs: MlpInputMode,
    pub rnn_hidden: usize,
    pub rnn_layers: usize,
    pub rnn_l2: f64,
    pub train: TrainConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            mlp_hidden: 128,
            mlp_l2: 0.0,
            mlp_inputs: MlpInputMode::FamilyMean,
            rnn_hidden: 64,
            rnn_layers: 2,
            rnn_l2: 1e-4,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tensors {
    Mlp(MlpParams),
    Rnn(GruParams),
}

/// Trained model together with the fused feature set that shapes its input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub tensors: Tensors,
    pub seed: u64,
    pub epoch: usize,
}

impl Checkpoint {
    /// Seeded initial parameters for the fused input layout.
    pub fn init(kind: ModelKind, config: &ModelConfig, fused: &FusedFeatureSet, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = match kind {
            ModelKind::Mlp => Tensors::Mlp(MlpParams::init(
                inputs::mlp_input_width(fused, config.mlp_inputs),
                config.mlp_hidden,
                &mut rng,
            )),
            ModelKind::Rnn => Tensors::Rnn(GruParams::init(
                inputs::sequence_width(fused),
                config.rnn_hidden,
                config.rnn_layers,
                &mut rng,
            )),
        };
        Checkpoint {
            kind,
            config: config.clone(),
            tensors,
            seed,
            epoch: 0,
        }
    }

    /// Trains on feature rows; returns the loss curve.
    pub fn fit(
        &mut self,
        rows: &[Vec<f64>],
        labels: &[bool],
        fused: &FusedFeatureSet,
        exec: Execution,
    ) -> Result<Vec<LossPoint>, NeuralError> {
        let cfg = &self.config.train;
        let curve = match &mut self.tensors {
            Tensors::Mlp(p) => {
                let xs: Vec<Vec<f64>> = rows.iter().map(|r| mlp_input(r, fused, self.config.mlp_inputs)).collect();
                p.set_prior(labels);
                let (trained, curve) = train(p.clone(), &xs, labels, self.config.mlp_l2, cfg, exec)?;
                *p = trained;
                curve
            }
            Tensors::Rnn(p) => {
                let xs: Vec<Sequence> = rows.iter().map(|r| sequence_input(r, fused)).collect();
                p.set_prior(labels);
                let (trained, curve) = train(p.clone(), &xs, labels, self.config.rnn_l2, cfg, exec)?;
                *p = trained;
                curve
            }
        };
        self.epoch = cfg.epochs;
        Ok(curve)
    }

    /// Suspiciousness in (0, 1) for each feature row.
    pub fn predict(&self, rows: &[Vec<f64>], fused: &FusedFeatureSet, exec: Execution) -> Result<Vec<f64>, NeuralError> {
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("feature row".into()));
        }
        Ok(match &self.tensors {
            Tensors::Mlp(p) => exec.map(rows, |r| p.predict(&mlp_input(r, fused, self.config.mlp_inputs))),
            Tensors::Rnn(p) => exec.map(rows, |r| p.predict(&sequence_input(r, fused))),
        })
    }

    /// Like [`Checkpoint::predict`] but refuses untrained models.
    pub fn score_statements(&self, rows: &[Vec<f64>], fused: &FusedFeatureSet, exec: Execution) -> Result<Vec<f64>, NeuralError> {
        if self.epoch == 0 {
            return Err(NeuralError::UntrainedModel);
        }
        self.predict(rows, fused, exec)
    }
}
