use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use tlrr::constraints::{constraints_from_labels, sample_labeled, ConstraintSet};
use tlrr::data::{self, Orientation, SynthParams};
use tlrr::experiment::{self, parse_config, parse_percentage, ConfigOverrides, Mode};
use tlrr::metrics;
use tlrr::solver::write_trace_csv;

#[derive(Parser)]
#[command(name = "tlrr", version, about = "Semi-supervised subspace clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Percentage sweep over seeded trials; writes report.json and curve.csv.
    Run(RunArgs),
    /// One solve on a dataset; dumps the final affinity.
    Solve(SolveArgs),
    /// Generate a union-of-subspaces dataset.
    Synth(SynthArgs),
    /// Score a predicted label file against ground truth.
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data CSV, or `synthetic`.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Comma-separated label fractions, e.g. `0.1,20%`.
    #[arg(long, value_delimiter = ',', value_parser = parse_percentage)]
    pct: Option<Vec<f64>>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory (default `results`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Constraint file with `i,j,+1` / `i,j,-1` lines. Otherwise constraints
    /// are drawn from `--labels` at the first `--pct` fraction.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Affinity output path.
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration residual trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    subspaces: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 30)]
    ambient: usize,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for data.csv and labels.txt.
    #[arg(long)]
    out: PathBuf,
}

impl CommonArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            dataset: self.dataset.clone(),
            labels: self.labels.clone(),
            percentages: self.pct.clone(),
            mode: self.mode,
            lambda: self.lambda,
            beta: self.beta,
            k_nn: self.knn,
            seed0: self.seed,
            ..Default::default()
        }
    }
}

fn run(args: RunArgs) -> tlrr::Result<()> {
    let mut o = args.common.overrides();
    o.trials = args.trials;
    o.output_dir = args.out;
    let mut cfg = parse_config(args.common.config.as_deref(), &o)?;
    if cfg.output_dir.is_none() {
        cfg.output_dir = Some("results".into());
    }
    let report = experiment::run_experiment(&cfg)?;
    println!("percentage,completed,failed,mean_acc,std_acc,mean_nmi,std_nmi");
    for a in &report.aggregates {
        println!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4}",
            a.percentage, a.completed, a.failed, a.mean_acc, a.std_acc, a.mean_nmi, a.std_nmi
        );
    }
    Ok(())
}

fn solve(args: SolveArgs) -> tlrr::Result<()> {
    let cfg = parse_config(args.common.config.as_deref(), &args.common.overrides())?;
    let ds = cfg.dataset.load()?;
    let n = ds.labels.len();
    let cs = match (&args.constraints, &args.common.pct) {
        (Some(path), _) => ConstraintSet::read(path, n)?,
        (None, Some(_)) => {
            let labeled = sample_labeled(n, cfg.percentages[0], cfg.seed0)?;
            constraints_from_labels(&labeled, &ds.labels)?
        }
        (None, None) => ConstraintSet::new(n),
    };
    info!("{} constraints on {n} samples", cs.len());
    let (w, result) =
        experiment::single_affinity(&ds.x, &cs, &cfg.hyperparams, cfg.mode, cfg.normalize)?;
    data::dump_affinity(&w, &args.out)?;
    if let Some(r) = &result {
        println!(
            "iterations={} converged={} max_residual={:.3e} s={}",
            r.iterations,
            r.converged,
            r.residuals.max(),
            r.s
        );
        if let Some(path) = &args.trace {
            write_trace_csv(&r.trace, path)?;
        }
    }
    Ok(())
}

fn synth(args: SynthArgs) -> tlrr::Result<()> {
    let ds = data::synth_subspaces(&SynthParams {
        num_subspaces: args.subspaces,
        sub_dim: args.dim,
        ambient_dim: args.ambient,
        points_per: args.points,
        noise_sigma: args.noise,
        seed: args.seed,
    })?;
    std::fs::create_dir_all(&args.out)?;
    data::save_csv(
        &ds.x,
        &args.out.join("data.csv"),
        Orientation::SamplesAsRows,
    )?;
    data::save_labels(&ds.labels, &args.out.join("labels.txt"))?;
    Ok(())
}

fn score(pred: PathBuf, truth: PathBuf) -> tlrr::Result<()> {
    let report = metrics::evaluate(&data::load_labels(&pred)?, &data::load_labels(&truth)?)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Solve(a) => solve(a),
        Command::Synth(a) => synth(a),
        Command::Metrics { pred, truth } => score(pred, truth),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
