//! Binary multi-objective feature selection: shared operators, Pareto
//! machinery, the wrapper objective and three optimizers.

pub mod archive;
pub mod mode;
pub mod mopso;
pub mod nsga2;
pub mod objective;
pub mod operators;
pub mod pareto;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;

pub use archive::{ArchiveEntry, ParetoArchive, ParetoRecord};
pub use objective::{evaluate_objectives, surrogate_accuracy, Objective, SurrogateConfig, WrapperObjective};
pub use operators::{fitness_scaled_mutation, mutation_probability, uniform_crossover};
pub use pareto::{crowding_distance, dominates, non_dominated_sort};

pub type Bits = Vec<bool>;

#[derive(Debug, Error)]
pub enum MooError {
    #[error("genome lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("chromosome selects no feature")]
    EmptySelection,
    #[error("invalid optimizer config: {0}")]
    Config(String),
    #[error("unknown optimizer {0:?} (expected nsga2, mopso or mode)")]
    UnknownOptimizer(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub bits: Bits,
    /// `None` until evaluated.
    pub objectives: Option<Vec<f64>>,
}

impl Chromosome {
    pub fn new(bits: Bits) -> Self {
        Chromosome {
            bits,
            objectives: None,
        }
    }

    pub fn selected(&self) -> Vec<usize> {
        selected(&self.bits)
    }
}

pub fn selected(bits: &[bool]) -> Vec<usize> {
    bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<Bits> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Sets one uniformly random bit when nothing is selected.
pub fn repair<R: Rng + ?Sized>(bits: &mut [bool], rng: &mut R) {
    if !bits.is_empty() && !bits.iter().any(|&b| b) {
        let i = rng.random_range(0..bits.len());
        bits[i] = true;
    }
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Bits {
    let mut bits: Bits = (0..n).map(|_| rng.random_bool(0.5)).collect();
    repair(&mut bits, rng);
    bits
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Nsga2,
    Mopso,
    Mode,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 3] = [OptimizerKind::Nsga2, OptimizerKind::Mopso, OptimizerKind::Mode];
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Nsga2 => "nsga2",
            OptimizerKind::Mopso => "mopso",
            OptimizerKind::Mode => "mode",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = MooError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nsga2" => Ok(OptimizerKind::Nsga2),
            "mopso" => Ok(OptimizerKind::Mopso),
            "mode" => Ok(OptimizerKind::Mode),
            _ => Err(MooError::UnknownOptimizer(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Ceiling that scales the fitness-dependent flip probability.
    pub mutation_prob: f64,
    /// Recorded for completeness; the binary operators do not use them.
    pub crossover_distribution_index: f64,
    pub mutation_distribution_index: f64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            population: 100,
            generations: 200,
            crossover_prob: 0.6,
            mutation_prob: 0.1,
            crossover_distribution_index: 1.0,
            mutation_distribution_index: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MopsoConfig {
    pub population: usize,
    /// Includes the initial swarm evaluation.
    pub iterations: usize,
    pub archive_size: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
}

impl Default for MopsoConfig {
    fn default() -> Self {
        MopsoConfig {
            population: 100,
            iterations: 100,
            archive_size: 100,
            inertia: 0.4,
            c1: 1.5,
            c2: 2.0,
            v_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub scale_factor: f64,
    pub archive_size: usize,
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig {
            population: 100,
            generations: 100,
            crossover_rate: 0.5,
            scale_factor: 0.2,
            archive_size: 100,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub nsga2: Nsga2Config,
    pub mopso: MopsoConfig,
    pub mode: ModeConfig,
}

/// Final archive plus evaluation accounting.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub optimizer: OptimizerKind,
    pub archive: ParetoArchive,
    pub evaluation_count: u64,
    pub generations: usize,
    pub wall_clock_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalsRecord {
    pub optimizer: OptimizerKind,
    pub evaluation_count: u64,
    pub generations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl OptimizationResult {
    pub fn evals_record(&self) -> EvalsRecord {
        EvalsRecord {
            optimizer: self.optimizer,
            evaluation_count: self.evaluation_count,
            generations: self.generations,
            wall_clock_s: self.wall_clock_s,
        }
    }
}

/// Runs the chosen optimizer. `wall_clock` only adds timing metadata.
pub fn optimize<O: Objective>(
    kind: OptimizerKind,
    objective: &O,
    config: &OptimizerConfig,
    seed: u64,
    exec: Execution,
    wall_clock: bool,
) -> Result<OptimizationResult, MooError> {
    let start = Instant::now();
    let mut result = match kind {
        OptimizerKind::Nsga2 => nsga2::nsga2(objective, &config.nsga2, seed, exec)?,
        OptimizerKind::Mopso => mopso::mopso(objective, &config.mopso, seed, exec)?,
        OptimizerKind::Mode => mode::mode(objective, &config.mode, seed, exec)?,
    };
    if wall_clock {
        result.wall_clock_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(result)
}

/// Evaluates every chromosome, in parallel when enabled.
pub(crate) fn evaluate_all<O: Objective>(objective: &O, bits: &[Bits], exec: Execution) -> Vec<Vec<f64>> {
    exec.map(bits, |b| objective.evaluate(b))
}
