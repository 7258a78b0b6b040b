use std::path::PathBuf;

use bma_core::{expand_full, Partition};
use data_io::{load_idx, synth_blobs, Dataset};
use models::{partition_for_model, LogisticRegressionProblem, MlpModel, QuadraticProblem};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smalldense::DenseMatrix;

use crate::config::{InitKind, ProblemKind, RunConfig};
use crate::{Error, Result};

/// Environment variable locating the MNIST IDX files.
pub const DATA_DIR_ENV: &str = "BMA_DATA_DIR";

/// A fully materialized training problem: objective, data, start point and
/// the block partition used by the block-mean optimizer.
pub enum ProblemInstance {
    Quadratic {
        problem: QuadraticProblem,
        theta0: Vec<f64>,
        partition: Partition,
    },
    Logreg {
        train: LogisticRegressionProblem,
        test: LogisticRegressionProblem,
        theta0: Vec<f64>,
        partition: Partition,
    },
    Mlp {
        model: MlpModel,
        train: Dataset,
        test: Dataset,
        theta0: Vec<f64>,
        partition: Partition,
    },
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic { problem, .. } => problem.dim(),
            Self::Logreg { train, .. } => train.dim(),
            Self::Mlp { model, .. } => model.param_count(),
        }
    }

    pub fn theta0(&self) -> &[f64] {
        match self {
            Self::Quadratic { theta0, .. } => theta0,
            Self::Logreg { theta0, .. } => theta0,
            Self::Mlp { theta0, .. } => theta0,
        }
    }

    pub fn partition(&self) -> &Partition {
        match self {
            Self::Quadratic { partition, .. } => partition,
            Self::Logreg { partition, .. } => partition,
            Self::Mlp { partition, .. } => partition,
        }
    }

    pub fn train_samples(&self) -> usize {
        match self {
            Self::Quadratic { .. } => 0,
            Self::Logreg { train, .. } => train.num_samples(),
            Self::Mlp { train, .. } => train.n,
        }
    }
}

pub fn build_problem(config: &RunConfig) -> Result<ProblemInstance> {
    match config.problem {
        ProblemKind::Quadratic => build_quadratic(config),
        ProblemKind::Logreg => build_logreg(config),
        ProblemKind::MlpSynth => build_mlp_synth(config),
        ProblemKind::MlpMnist => build_mlp_mnist(config),
    }
}

/// A seeded positive definite quadratic whose Hessian carries strong
/// constant cross-block coupling: a small random bulk plus the expansion of
/// a 2x2 coupling pattern scaled by `quad_coupling`. At `quad_dim = 2` this
/// degenerates to the textbook `[[1, -c], [-c, 1]]` case.
pub fn coupled_quadratic(dim: usize, coupling: f64, seed: u64) -> Result<QuadraticProblem> {
    if dim < 2 {
        return Err(Error::Usage(
            "quadratic dimension must be at least 2".into(),
        ));
    }
    if dim == 2 {
        let q = DenseMatrix::from_rows(&[[1.0, -coupling], [-coupling, 1.0]]).expect("2x2 literal");
        return QuadraticProblem::new(q).map_err(Error::from);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    let mut q = a.matmul(&a.transpose())?.scale(0.1 / dim as f64);
    for i in 0..dim {
        q.set(i, i, q.get(i, i) + 0.05);
    }
    let half = dim / 2;
    let p = Partition::new(vec![half, dim - half]).expect("two positive blocks");
    let b = DenseMatrix::from_rows(&[
        [0.6 * coupling, -0.5 * coupling],
        [-0.5 * coupling, 0.6 * coupling],
    ])
    .expect("2x2 literal");
    q.add_assign(&expand_full(&b, &p)?)?;
    QuadraticProblem::new(q.symmetrized()).map_err(Error::from)
}

fn even_partition(dim: usize, blocks: usize) -> Result<Partition> {
    let blocks = blocks.clamp(1, dim);
    let base = dim / blocks;
    let extra = dim % blocks;
    let sizes: Vec<usize> = (0..blocks).map(|i| base + usize::from(i < extra)).collect();
    Partition::new(sizes).map_err(Error::from)
}

fn build_quadratic(config: &RunConfig) -> Result<ProblemInstance> {
    let problem = coupled_quadratic(config.quad_dim, config.quad_coupling, config.seed)?;
    let theta0 = match config.init {
        InitKind::Worst => problem.worst_start(),
        InitKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
            (0..config.quad_dim)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect()
        }
    };
    let partition = even_partition(config.quad_dim, config.quad_blocks)?;
    Ok(ProblemInstance::Quadratic {
        problem,
        theta0,
        partition,
    })
}

fn build_logreg(config: &RunConfig) -> Result<ProblemInstance> {
    let total = config.train_n + config.test_n;
    let ds = synth_blobs(total, config.blob_dim, 2, config.blob_spread, config.seed)?;
    let (train_ds, test_ds) = ds.split(config.train_n)?;
    let to_problem = |ds: &Dataset| {
        let labels: Vec<u8> = ds.labels.iter().map(|&y| y as u8).collect();
        LogisticRegressionProblem::new(ds.inputs.clone(), labels, ds.p, 0.0)
    };
    let train = to_problem(&train_ds)?;
    let test = to_problem(&test_ds)?;
    let dim = train.dim();
    // Weights in one block, bias in its own: the logistic analogue of the
    // per-layer weight/bias grouping.
    let partition = Partition::new(vec![dim - 1, 1])?;
    Ok(ProblemInstance::Logreg {
        train,
        test,
        theta0: vec![0.0; dim],
        partition,
    })
}

fn mlp_chain(input: usize, hidden: &[usize], classes: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input);
    sizes.extend_from_slice(hidden);
    sizes.push(classes);
    sizes
}

fn build_mlp_synth(config: &RunConfig) -> Result<ProblemInstance> {
    let classes = 3;
    let total = config.train_n + config.test_n;
    let ds = synth_blobs(
        total,
        config.blob_dim,
        classes,
        config.blob_spread,
        config.seed,
    )?;
    let (train, test) = ds.split(config.train_n)?;
    let model = MlpModel::new(mlp_chain(config.blob_dim, &config.mlp_hidden, classes))?;
    let theta0 = model.init_params(config.seed);
    let (partition, _) = partition_for_model(&model, config.granularity);
    Ok(ProblemInstance::Mlp {
        model,
        train,
        test,
        theta0,
        partition,
    })
}

fn build_mlp_mnist(config: &RunConfig) -> Result<ProblemInstance> {
    let dir = std::env::var(DATA_DIR_ENV).map_err(|_| {
        Error::Data(format!(
            "{DATA_DIR_ENV} is not set; it must point at the MNIST IDX files"
        ))
    })?;
    let dir = PathBuf::from(dir);
    let train_full = load_idx(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
    )?;
    let test_full = load_idx(
        &dir.join("t10k-images-idx3-ubyte"),
        &dir.join("t10k-labels-idx1-ubyte"),
    )?;
    let train = seeded_subset(&train_full, config.mnist_train, config.seed)?;
    let test = seeded_subset(&test_full, config.mnist_test, config.seed.wrapping_add(1))?;
    let model = MlpModel::new(mlp_chain(train.p, &config.mlp_hidden, train_full.classes))?;
    let theta0 = model.init_params(config.seed);
    let (partition, _) = partition_for_model(&model, config.granularity);
    Ok(ProblemInstance::Mlp {
        model,
        train,
        test,
        theta0,
        partition,
    })
}

/// First `k` samples after a seeded shuffle.
fn seeded_subset(ds: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    let mut order: Vec<usize> = (0..ds.n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order.truncate(k.min(ds.n));
    ds.reordered(&order).map_err(Error::from)
}
