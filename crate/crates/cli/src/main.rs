use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use faultfuse::corpus::{generate_synthetic, save_dataset, FaultKind, FaultRule, SyntheticSpec, Template};
use faultfuse::moo::OptimizerKind;
use faultfuse::neural::{MlpInputMode, ModelKind, OptimizerRule};
use faultfuse::pipeline::{self, PipelineError, RunConfig};
use faultfuse::Execution;

#[derive(Parser)]
#[command(name = "faultfuse", version, about = "Statement-level fault localization by multi-objective feature fusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic single-fault dataset directory.
    Synth(SynthArgs),
    /// Extract features, labels and baseline scores.
    Extract(RunArgs),
    /// Run feature-subset optimization over extracted features.
    Select(RunArgs),
    /// Fuse the Pareto archive into a weighted feature set.
    Fuse(RunArgs),
    /// Train the ranking model on the fused features.
    Train(RunArgs),
    /// Score statements with the trained model.
    Rank(RunArgs),
    /// Build ranking reports from the scores.
    Evaluate(RunArgs),
    /// Run every stage end to end.
    Run(RunArgs),
    /// Run every optimizer x model combination on each dataset.
    Matrix(MatrixArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    template: Template,
    #[arg(long, default_value_t = 100)]
    tests: usize,
    #[arg(long, env = "FAULTFUSE_SEED", default_value_t = 7)]
    seed: u64,
    /// Statement to corrupt, as an id or `S<id>`.
    #[arg(long, value_parser = parse_statement)]
    fault: Option<usize>,
    #[arg(long, default_value = "auto")]
    fault_kind: FaultKind,
    /// Program size (array template only).
    #[arg(long)]
    statements: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Serialized RunConfig; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory or `template[:seed]`; repeatable or comma-separated.
    #[arg(long = "dataset", value_delimiter = ',')]
    datasets: Vec<String>,
    #[arg(long)]
    train_on: Option<String>,
    #[arg(long, value_delimiter = ',')]
    test_on: Vec<String>,
    /// Tests per generated dataset for `template[:seed]` sources.
    #[arg(long)]
    synth_tests: Option<usize>,
    #[arg(long)]
    optimizer: Option<OptimizerKind>,
    /// Population size of the selected optimizer.
    #[arg(long)]
    population: Option<usize>,
    /// Generations (iterations for MOPSO) of the selected optimizer.
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Hidden width of the selected model.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    mlp_inputs: Option<String>,
    /// Plain gradient descent instead of Adam.
    #[arg(long)]
    plain_sgd: bool,
    #[arg(long)]
    keep_fraction: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measure time objectives and report wall-clock totals.
    #[arg(long)]
    wall_clock: bool,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_values = ["nsga2", "mopso", "mode"])]
    optimizers: Vec<OptimizerKind>,
    #[arg(long, value_delimiter = ',', default_values = ["mlp", "rnn"])]
    models: Vec<ModelKind>,
}

fn parse_statement(s: &str) -> Result<usize, String> {
    s.trim_start_matches(['S', 's'])
        .parse()
        .map_err(|_| format!("expected a statement id like 7 or S7, got {s:?}"))
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("FAULTFUSE_SEED") {
        Ok(v) => Ok(Some(
            v.trim()
                .parse()
                .map_err(|_| PipelineError::Config(format!("FAULTFUSE_SEED is not an integer: {v:?}")))?,
        )),
        Err(_) => Ok(None),
    }
}

impl RunArgs {
    /// Defaults, then the config file, then `FAULTFUSE_SEED`, then flags.
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = env_seed()? {
            c.seed = s;
        }
        if !self.datasets.is_empty() {
            c.datasets = self.datasets.clone();
        }
        if self.train_on.is_some() {
            c.train_on = self.train_on.clone();
        }
        if !self.test_on.is_empty() {
            c.test_on = self.test_on.clone();
        }
        if let Some(v) = self.synth_tests {
            c.synth_tests = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = v;
        }
        let p = &mut c.optimizer_params;
        if let Some(v) = self.population {
            match c.optimizer {
                OptimizerKind::Nsga2 => p.nsga2.population = v,
                OptimizerKind::Mopso => p.mopso.population = v,
                OptimizerKind::Mode => p.mode.population = v,
            }
        }
        if let Some(v) = self.generations {
            match c.optimizer {
                OptimizerKind::Nsga2 => p.nsga2.generations = v,
                OptimizerKind::Mopso => p.mopso.iterations = v,
                OptimizerKind::Mode => p.mode.generations = v,
            }
        }
        if let Some(v) = self.model {
            c.model = v;
        }
        let m = &mut c.model_params;
        if let Some(v) = self.epochs {
            m.train.epochs = v;
        }
        if let Some(v) = self.hidden {
            match c.model {
                ModelKind::Mlp => m.mlp_hidden = v,
                ModelKind::Rnn => m.rnn_hidden = v,
            }
        }
        if let Some(v) = &self.mlp_inputs {
            m.mlp_inputs = match v.as_str() {
                "family-mean" => MlpInputMode::FamilyMean,
                "concat" => MlpInputMode::Concat,
                _ => return Err(PipelineError::Config(format!("unknown MLP input mode {v:?}")).into()),
            };
        }
        if self.plain_sgd {
            m.train.rule = OptimizerRule::Sgd;
        }
        if let Some(v) = self.keep_fraction {
            c.keep_fraction = v;
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.out_dir = v.clone();
        }
        if self.wall_clock {
            c.wall_clock = true;
        }
        if self.sequential {
            c.execution = Execution::Sequential;
        }
        c.surrogate.wall_clock = c.wall_clock;
        c.validate()?;
        Ok(c)
    }
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mut spec = SyntheticSpec::new(a.template, a.tests, a.seed);
    spec.statements = a.statements;
    spec.fault = FaultRule {
        statement: a.fault,
        kind: a.fault_kind,
    };
    let d = generate_synthetic(&spec).map_err(|source| PipelineError::Corpus {
        dataset: a.template.to_string(),
        source,
    })?;
    save_dataset(&d, &a.out).map_err(|source| PipelineError::Corpus {
        dataset: a.out.display().to_string(),
        source,
    })?;
    println!("wrote {} ({} statements, {} tests)", a.out.display(), d.n_statements(), d.n_tests());
    Ok(())
}

fn stage(a: &RunArgs, f: impl FnOnce(&RunConfig, &Path) -> Result<(), PipelineError>) -> Result<()> {
    let c = a.resolve()?;
    fs::create_dir_all(&c.out_dir).map_err(|source| PipelineError::Io {
        path: c.out_dir.clone(),
        source,
    })?;
    f(&c, &c.out_dir)?;
    Ok(())
}

fn print_aggregates(set: &faultfuse::metrics::ReportSet) {
    for a in &set.aggregates {
        let s = &a.summary;
        let auc = s.auc.map_or_else(|| "NA".into(), |v| format!("{v:.4}"));
        println!(
            "{:<10} top1={} top3={} top5={} mar={:.3} mfr={:.3} auc={auc} ({} datasets)",
            a.model, s.top1, s.top3, s.top5, s.mar, s.mfr, a.datasets
        );
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a)?,
        Command::Extract(a) => stage(&a, pipeline::extract)?,
        Command::Select(a) => stage(&a, |c, d| pipeline::select(c, d).map(|_| ()))?,
        Command::Fuse(a) => stage(&a, |c, d| pipeline::fuse_stage(c, d).map(|_| ()))?,
        Command::Train(a) => stage(&a, |c, d| pipeline::train_stage(c, d).map(|_| ()))?,
        Command::Rank(a) => stage(&a, |c, d| pipeline::rank(c, d).map(|_| ()))?,
        Command::Evaluate(a) => stage(&a, |c, d| {
            pipeline::evaluate(c, d).map(|set| print_aggregates(&set))
        })?,
        Command::Run(a) => {
            let c = a.resolve()?;
            let s = pipeline::run_pipeline(&c)?;
            print_aggregates(&s.reports);
            println!("artifacts in {}", s.out_dir.display());
        }
        Command::Matrix(m) => {
            if m.optimizers.is_empty() || m.models.is_empty() {
                bail!(PipelineError::Config("empty optimizer or model list".into()));
            }
            let c = m.run.resolve()?;
            let rows = pipeline::run_matrix(&c, &m.optimizers, &m.models)?;
            println!("{} cells, summary in {}", rows.len(), c.out_dir.join(pipeline::MATRIX_TSV).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
