use std::path::PathBuf;
use std::time::Instant;

use data_io::{write_csv, StepRecord, TrainLog};
use optim::{AdaGradBmaState, AdaGradDiagState, AdaGradFullState};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{LossLog, OptimizerKind, ProblemKind, RunConfig};
use crate::problems::{build_problem, ProblemInstance};
use crate::{Error, Result};

/// Dense full-matrix AdaGrad is refused above this dimension.
pub const FULL_ADAGRAD_DIM_GUARD: usize = 2000;

/// Full-loss logging is downgraded to batch-loss logging (in `auto` mode)
/// when samples x dimension exceeds this.
const FULL_LOSS_BUDGET: usize = 50_000_000;

/// Outcome of one learning-rate grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub lr: f64,
    pub log: TrainLog,
    pub csv_path: PathBuf,
    pub final_loss: Option<f64>,
    pub steps: u64,
    pub diverged_at: Option<u64>,
    pub mean_step_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub cells: Vec<CellResult>,
    /// Index of the best cell by final training loss; `None` when every
    /// cell diverged.
    pub best: Option<usize>,
    pub summary_line: String,
}

impl RunSummary {
    pub fn best_cell(&self) -> Option<&CellResult> {
        self.best.map(|i| &self.cells[i])
    }
}

/// Runs one experiment: every learning rate in the grid is trained as an
/// isolated cell (concurrently with the `parallel` feature; cells share no
/// mutable state), one CSV is written per cell, and the best cell by final
/// training loss is named in the summary.
pub fn run_experiment(config: &RunConfig) -> Result<RunSummary> {
    validate_capacity(config)?;
    let instance = build_problem(config)?;
    std::fs::create_dir_all(&config.out)?;

    let cell_of = |&lr: &f64| -> Result<CellResult> { run_cell(config, &instance, lr) };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<CellResult>> = {
        use rayon::prelude::*;
        config.lrs.par_iter().map(cell_of).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<CellResult>> = config.lrs.iter().map(cell_of).collect();

    let mut cells = Vec::with_capacity(results.len());
    for r in results {
        cells.push(r?);
    }
    for cell in &cells {
        write_csv(&cell.log, &cell.csv_path)?;
    }

    let best = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.diverged_at.is_none() && c.final_loss.is_some())
        .min_by(|(_, a), (_, b)| {
            a.final_loss
                .unwrap()
                .partial_cmp(&b.final_loss.unwrap())
                .expect("finite losses")
        })
        .map(|(i, _)| i);

    let summary_line = match best {
        Some(i) => {
            let c = &cells[i];
            // Name the csv relative to the output directory so the summary
            // depends only on the configuration, not on where it ran.
            let file = c
                .csv_path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            format!(
                "best cell: lr={} final_loss={} steps={} csv={}",
                c.lr,
                c.final_loss.unwrap(),
                c.steps,
                file
            )
        }
        None => "best cell: none (all cells diverged)".to_string(),
    };
    std::fs::write(config.out.join("summary.txt"), format!("{summary_line}\n"))?;
    Ok(RunSummary {
        cells,
        best,
        summary_line,
    })
}

fn validate_capacity(config: &RunConfig) -> Result<()> {
    if config.optimizer != OptimizerKind::AdagradFull {
        return Ok(());
    }
    let dim = match config.problem {
        ProblemKind::Quadratic => config.quad_dim,
        ProblemKind::Logreg => config.blob_dim + 1,
        ProblemKind::MlpSynth => {
            let chain: Vec<usize> = std::iter::once(config.blob_dim)
                .chain(config.mlp_hidden.iter().copied())
                .chain(std::iter::once(3))
                .collect();
            chain.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
        }
        ProblemKind::MlpMnist => {
            let chain: Vec<usize> = std::iter::once(784)
                .chain(config.mlp_hidden.iter().copied())
                .chain(std::iter::once(10))
                .collect();
            chain.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
        }
    };
    if dim > FULL_ADAGRAD_DIM_GUARD {
        return Err(Error::Usage(format!(
            "adagrad-full is refused at dimension {dim} (guard: {FULL_ADAGRAD_DIM_GUARD})"
        )));
    }
    Ok(())
}

enum OptimizerState {
    Gd(f64),
    GdLs,
    Newton(f64),
    Full(AdaGradFullState),
    Diag(AdaGradDiagState),
    Bma(AdaGradBmaState),
}

fn make_optimizer(config: &RunConfig, instance: &ProblemInstance, lr: f64) -> OptimizerState {
    let dim = instance.dim();
    match config.optimizer {
        OptimizerKind::Gd => OptimizerState::Gd(lr),
        OptimizerKind::GdLs => OptimizerState::GdLs,
        OptimizerKind::Newton => OptimizerState::Newton(lr),
        OptimizerKind::AdagradFull => {
            OptimizerState::Full(AdaGradFullState::new(dim, lr, config.eps, config.eig_floor))
        }
        OptimizerKind::AdagradDiag => {
            OptimizerState::Diag(AdaGradDiagState::new(dim, lr, config.eps))
        }
        OptimizerKind::AdagradBma => OptimizerState::Bma(
            AdaGradBmaState::new(
                instance.partition().clone(),
                lr,
                config.eps,
                config.eig_floor,
                config.refresh,
            )
            .with_scaled_u(config.scaled_u),
        ),
    }
}

fn csv_path(config: &RunConfig, lr: f64) -> PathBuf {
    config.out.join(format!(
        "run_{}_{}_lr{}.csv",
        config.problem.name(),
        config.optimizer.name(),
        lr
    ))
}

fn base_metadata(log: &mut TrainLog, config: &RunConfig, lr: f64) {
    log.push_metadata("problem", config.problem.name());
    log.push_metadata("optimizer", config.optimizer.name());
    log.push_metadata("lr", lr);
    log.push_metadata("seed", config.seed);
    log.push_metadata(
        "partition",
        match config.granularity {
            models::Granularity::Layer => "layer",
            models::Granularity::Unit => "unit",
        },
    );
    log.push_metadata("refresh", config.refresh);
    log.push_metadata("eps", config.eps);
    log.push_metadata("eig_floor", config.eig_floor);
    log.push_metadata("epochs", config.epochs);
    log.push_metadata("batch", config.batch);
    log.push_metadata("scaled_u", config.scaled_u);
    log.push_metadata("timing", if config.timing { "wall" } else { "off" });
}

fn run_cell(config: &RunConfig, instance: &ProblemInstance, lr: f64) -> Result<CellResult> {
    let mut log = TrainLog::default();
    base_metadata(&mut log, config, lr);
    let mut theta = instance.theta0().to_vec();
    let mut optimizer = make_optimizer(config, instance, lr);

    let mut clock_ms = 0u64;
    let mut spent = std::time::Duration::ZERO;
    let mut steps = 0u64;

    match instance {
        ProblemInstance::Quadratic { problem, .. } => {
            let (loss0, _) = problem.loss_grad(&theta)?;
            log.push_record(StepRecord {
                step: 0,
                epoch: 0,
                train_loss: loss0,
                test_acc: None,
                cumulative_ms: 0,
            });
            // One full-gradient update per epoch.
            for step in 1..=config.epochs as u64 {
                let started = Instant::now();
                let (_, grad) = problem.loss_grad(&theta)?;
                apply_step(&mut optimizer, &mut theta, &grad, problem.q())?;
                spent += started.elapsed();
                if config.timing {
                    clock_ms = spent.as_millis() as u64;
                }
                let (loss, _) = problem.loss_grad(&theta)?;
                steps = step;
                if !log.push_record(StepRecord {
                    step,
                    epoch: step,
                    train_loss: loss,
                    test_acc: None,
                    cumulative_ms: clock_ms,
                }) {
                    break;
                }
            }
        }
        ProblemInstance::Logreg { train, test, .. } => {
            let n = train.num_samples();
            let full_batch: Vec<usize> = (0..n).collect();
            let log_full = use_full_loss(config, n * train.dim());
            let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
            let (loss0, _) = train.loss_grad(&theta, &full_batch)?;
            log.push_record(StepRecord {
                step: 0,
                epoch: 0,
                train_loss: loss0,
                test_acc: None,
                cumulative_ms: 0,
            });
            let mut step = 0u64;
            'epochs: for epoch in 0..config.epochs as u64 {
                let mut order = full_batch.clone();
                order.shuffle(&mut shuffle_rng);
                let batches: Vec<&[usize]> = order.chunks(config.batch).collect();
                let last_in_epoch = batches.len();
                for (k, batch) in batches.into_iter().enumerate() {
                    let started = Instant::now();
                    let (batch_loss, grad) = train.loss_grad(&theta, batch)?;
                    apply_vector_step(&mut optimizer, &mut theta, &grad)?;
                    spent += started.elapsed();
                    if config.timing {
                        clock_ms = spent.as_millis() as u64;
                    }
                    step += 1;
                    steps = step;
                    let loss = if log_full {
                        train.loss_grad(&theta, &full_batch)?.0
                    } else {
                        batch_loss
                    };
                    let test_acc = (k + 1 == last_in_epoch)
                        .then(|| {
                            test.accuracy(&theta, &(0..test.num_samples()).collect::<Vec<_>>())
                        })
                        .transpose()?;
                    if !log.push_record(StepRecord {
                        step,
                        epoch,
                        train_loss: loss,
                        test_acc,
                        cumulative_ms: clock_ms,
                    }) {
                        break 'epochs;
                    }
                }
            }
        }
        ProblemInstance::Mlp {
            model, train, test, ..
        } => {
            let n = train.n;
            let log_full = use_full_loss(config, n * model.param_count());
            let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
            let (loss0, _) = model.loss_grad(&theta, &train.inputs, &train.labels)?;
            log.push_record(StepRecord {
                step: 0,
                epoch: 0,
                train_loss: loss0,
                test_acc: None,
                cumulative_ms: 0,
            });
            let mut step = 0u64;
            'epochs: for epoch in 0..config.epochs as u64 {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut shuffle_rng);
                let batches: Vec<&[usize]> = order.chunks(config.batch).collect();
                let last_in_epoch = batches.len();
                for (k, batch) in batches.into_iter().enumerate() {
                    let started = Instant::now();
                    let (inputs, labels) = gather(train, batch);
                    let (batch_loss, grad) = model.loss_grad(&theta, &inputs, &labels)?;
                    apply_vector_step(&mut optimizer, &mut theta, &grad)?;
                    spent += started.elapsed();
                    if config.timing {
                        clock_ms = spent.as_millis() as u64;
                    }
                    step += 1;
                    steps = step;
                    let loss = if log_full {
                        model.loss_grad(&theta, &train.inputs, &train.labels)?.0
                    } else {
                        batch_loss
                    };
                    let test_acc = (k + 1 == last_in_epoch)
                        .then(|| model.accuracy(&theta, &test.inputs, &test.labels))
                        .transpose()?;
                    if !log.push_record(StepRecord {
                        step,
                        epoch,
                        train_loss: loss,
                        test_acc,
                        cumulative_ms: clock_ms,
                    }) {
                        break 'epochs;
                    }
                }
            }
        }
    }

    let mean_step_ms = if steps > 0 {
        spent.as_secs_f64() * 1e3 / steps as f64
    } else {
        0.0
    };
    Ok(CellResult {
        lr,
        final_loss: log.final_loss(),
        diverged_at: log.diverged_at,
        csv_path: csv_path(config, lr),
        steps,
        mean_step_ms,
        log,
    })
}

fn use_full_loss(config: &RunConfig, cost: usize) -> bool {
    match config.loss_log {
        LossLog::Full => true,
        LossLog::Batch => false,
        LossLog::Auto => cost <= FULL_LOSS_BUDGET,
    }
}

fn gather(ds: &data_io::Dataset, batch: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let mut inputs = Vec::with_capacity(batch.len() * ds.p);
    let mut labels = Vec::with_capacity(batch.len());
    for &i in batch {
        inputs.extend_from_slice(ds.sample(i));
        labels.push(ds.labels[i]);
    }
    (inputs, labels)
}

/// Quadratic-problem step dispatch; line search and Newton need the Hessian.
fn apply_step(
    optimizer: &mut OptimizerState,
    theta: &mut [f64],
    grad: &[f64],
    q: &smalldense::DenseMatrix,
) -> Result<()> {
    match optimizer {
        OptimizerState::GdLs => {
            optim::gd_exact_line_search_step(theta, q)?;
            Ok(())
        }
        OptimizerState::Newton(lr) => Ok(optim::newton_step(theta, grad, q, *lr)?),
        other => apply_vector_step(other, theta, grad),
    }
}

fn apply_vector_step(
    optimizer: &mut OptimizerState,
    theta: &mut [f64],
    grad: &[f64],
) -> Result<()> {
    match optimizer {
        OptimizerState::Gd(lr) => Ok(optim::gd_step(theta, grad, *lr)?),
        OptimizerState::GdLs | OptimizerState::Newton(_) => Err(Error::Usage(
            "line search and newton require the quadratic problem".into(),
        )),
        OptimizerState::Full(state) => Ok(state.step(theta, grad)?),
        OptimizerState::Diag(state) => Ok(state.step(theta, grad)?),
        OptimizerState::Bma(state) => Ok(state.step(theta, grad)?),
    }
}
