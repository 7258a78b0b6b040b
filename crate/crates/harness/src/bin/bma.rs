use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use harness::config::{parse_config_file, parse_usize_list, PartialRunConfig};
use harness::selftest::Fault;
use harness::{
    run_experiment, run_fisher_analysis, run_selftest, Error, FisherConfig, FisherGranularity,
};

/// Block-mean matrix approximation experiments.
#[derive(Parser)]
#[command(name = "bma", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one optimizer on one problem, optionally over the learning-rate grid.
    Run(Box<RunArgs>),
    /// Compute an empirical Fisher matrix and its block-mean fits.
    Fisher(FisherArgs),
    /// Run the built-in oracle-equivalence suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// quadratic | logreg | mlp-synth | mlp-mnist
    #[arg(long)]
    problem: Option<String>,
    /// gd | gd-ls | newton | adagrad-full | adagrad-diag | adagrad-bma
    #[arg(long)]
    optimizer: Option<String>,
    /// Single learning rate (default 0.01); conflicts with --lr-grid.
    #[arg(long)]
    lr: Option<f64>,
    /// Sweep the grid {1, 0.1, 0.01, 0.001, 0.0001}.
    #[arg(long)]
    lr_grid: bool,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Block granularity for adagrad-bma on networks: layer | unit.
    #[arg(long)]
    partition: Option<String>,
    /// Recompute the block correction every N steps (cached in between).
    #[arg(long)]
    refresh: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eig_floor: Option<f64>,
    /// Apply the block correction to scaled-gradient block sums.
    #[arg(long)]
    bma_scaled_u: bool,
    /// Record wall-clock milliseconds in the CSV (breaks byte determinism).
    #[arg(long)]
    timing: bool,
    /// Per-step loss column: auto | full | batch.
    #[arg(long)]
    loss_log: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value config file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    quad_dim: Option<usize>,
    #[arg(long)]
    quad_coupling: Option<f64>,
    #[arg(long)]
    quad_blocks: Option<usize>,
    /// Start point: random | worst (quadratic only).
    #[arg(long)]
    init: Option<String>,
    /// Hidden layer sizes, comma separated (e.g. 12,10).
    #[arg(long)]
    mlp_hidden: Option<String>,
    #[arg(long)]
    blob_dim: Option<usize>,
    #[arg(long)]
    blob_spread: Option<f64>,
    #[arg(long)]
    train_n: Option<usize>,
    #[arg(long)]
    test_n: Option<usize>,
    #[arg(long)]
    mnist_train: Option<usize>,
    #[arg(long)]
    mnist_test: Option<usize>,
}

#[derive(Args)]
struct FisherArgs {
    /// Training steps before the Fisher is taken.
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated subset of layer,unit,singleton.
    #[arg(long)]
    granularities: Option<String>,
    /// Print the normalized (per-entry) error sequence.
    #[arg(long)]
    normalized: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mlp_hidden: Option<String>,
    #[arg(long)]
    blob_dim: Option<usize>,
    #[arg(long)]
    blob_classes: Option<usize>,
    #[arg(long)]
    blob_spread: Option<f64>,
    #[arg(long)]
    train_n: Option<usize>,
    #[arg(long)]
    max_samples: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Negative control: inject a sign fault into the block correction.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(Error::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Error::Data(msg)) => {
            eprintln!("data error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> harness::Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let config = resolve_run_config(*args)?;
            let summary = run_experiment(&config)?;
            for cell in &summary.cells {
                let status = match cell.diverged_at {
                    Some(step) => format!("diverged at step {step}"),
                    None => format!("final_loss={}", cell.final_loss.unwrap_or(f64::NAN)),
                };
                println!(
                    "cell lr={}: {} steps, {} -> {}",
                    cell.lr,
                    cell.steps,
                    status,
                    cell.csv_path.display()
                );
                if config.timing {
                    println!("  mean step time: {:.3} ms", cell.mean_step_ms);
                }
            }
            println!("{}", summary.summary_line);
            Ok(ExitCode::SUCCESS)
        }
        Command::Fisher(args) => {
            let config = resolve_fisher_config(args)?;
            let report = run_fisher_analysis(&config)?;
            for line in &report.lines {
                println!("{line}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest(args) => {
            let fault = args.inject_fault.then_some(Fault::ComputeDSign);
            let report = run_selftest(fault);
            print!("{}", report.render());
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn resolve_run_config(args: RunArgs) -> harness::Result<harness::RunConfig> {
    let from_file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => PartialRunConfig::default(),
    };
    let mlp_hidden = args
        .mlp_hidden
        .as_deref()
        .map(parse_usize_list)
        .transpose()
        .map_err(Error::Usage)?;
    let from_flags = PartialRunConfig {
        problem: args.problem,
        optimizer: args.optimizer,
        lr: args.lr,
        lr_grid: args.lr_grid.then_some(true),
        epochs: args.epochs,
        batch: args.batch,
        seed: args.seed,
        partition: args.partition,
        refresh: args.refresh,
        eps: args.eps,
        eig_floor: args.eig_floor,
        scaled_u: args.bma_scaled_u.then_some(true),
        timing: args.timing.then_some(true),
        loss_log: args.loss_log,
        out: args.out,
        quad_dim: args.quad_dim,
        quad_coupling: args.quad_coupling,
        quad_blocks: args.quad_blocks,
        init: args.init,
        mlp_hidden,
        blob_dim: args.blob_dim,
        blob_spread: args.blob_spread,
        train_n: args.train_n,
        test_n: args.test_n,
        mnist_train: args.mnist_train,
        mnist_test: args.mnist_test,
    };
    from_flags.or(from_file).resolve()
}

fn resolve_fisher_config(args: FisherArgs) -> harness::Result<FisherConfig> {
    let mut config = FisherConfig::default();
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(spec) = args.granularities.as_deref() {
        config.granularities = spec
            .split(',')
            .map(|tok| FisherGranularity::parse(tok.trim()))
            .collect::<harness::Result<Vec<_>>>()?;
        if config.granularities.is_empty() {
            return Err(Error::Usage("no granularities given".into()));
        }
    }
    config.normalized = args.normalized;
    if let Some(out) = args.out {
        config.out = out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(spec) = args.mlp_hidden.as_deref() {
        config.mlp_hidden = parse_usize_list(spec).map_err(Error::Usage)?;
    }
    if let Some(v) = args.blob_dim {
        config.blob_dim = v;
    }
    if let Some(v) = args.blob_classes {
        config.blob_classes = v;
    }
    if let Some(v) = args.blob_spread {
        config.blob_spread = v;
    }
    if let Some(v) = args.train_n {
        config.train_n = v;
        config.max_samples = config.max_samples.max(v);
    }
    if let Some(v) = args.max_samples {
        config.max_samples = v;
    }
    Ok(config)
}
