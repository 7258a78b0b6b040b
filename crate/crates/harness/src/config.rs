use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// The default learning-rate grid swept by `--lr-grid`.
pub const LR_GRID: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Quadratic,
    Logreg,
    MlpSynth,
    MlpMnist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Gd,
    GdLs,
    Newton,
    AdagradFull,
    AdagradDiag,
    AdagradBma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Random,
    /// Worst-case start for line search on a quadratic (eigencoordinates
    /// proportional to reciprocal eigenvalues).
    Worst,
}

/// What the per-step `train_loss` column records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossLog {
    /// Full training loss when affordable, batch loss otherwise.
    Auto,
    Full,
    Batch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherGranularity {
    Layer,
    Unit,
    Singleton,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "logreg" => Ok(Self::Logreg),
            "mlp-synth" => Ok(Self::MlpSynth),
            "mlp-mnist" => Ok(Self::MlpMnist),
            other => Err(Error::Usage(format!("unknown problem '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::Logreg => "logreg",
            Self::MlpSynth => "mlp-synth",
            Self::MlpMnist => "mlp-mnist",
        }
    }
}

impl OptimizerKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Self::Gd),
            "gd-ls" => Ok(Self::GdLs),
            "newton" => Ok(Self::Newton),
            "adagrad-full" => Ok(Self::AdagradFull),
            "adagrad-diag" => Ok(Self::AdagradDiag),
            "adagrad-bma" => Ok(Self::AdagradBma),
            other => Err(Error::Usage(format!("unknown optimizer '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gd => "gd",
            Self::GdLs => "gd-ls",
            Self::Newton => "newton",
            Self::AdagradFull => "adagrad-full",
            Self::AdagradDiag => "adagrad-diag",
            Self::AdagradBma => "adagrad-bma",
        }
    }
}

impl FisherGranularity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "layer" => Ok(Self::Layer),
            "unit" => Ok(Self::Unit),
            "singleton" => Ok(Self::Singleton),
            other => Err(Error::Usage(format!("unknown granularity '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Layer => "layer",
            Self::Unit => "unit",
            Self::Singleton => "singleton",
        }
    }
}

/// Fully resolved configuration for `run`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub optimizer: OptimizerKind,
    pub lrs: Vec<f64>,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub granularity: models::Granularity,
    pub refresh: u64,
    pub eps: f64,
    pub eig_floor: f64,
    pub scaled_u: bool,
    pub timing: bool,
    pub loss_log: LossLog,
    pub out: PathBuf,
    pub quad_dim: usize,
    pub quad_coupling: f64,
    pub quad_blocks: usize,
    pub init: InitKind,
    pub mlp_hidden: Vec<usize>,
    pub blob_dim: usize,
    pub blob_spread: f64,
    pub train_n: usize,
    pub test_n: usize,
    pub mnist_train: usize,
    pub mnist_test: usize,
}

/// Option-valued mirror of [`RunConfig`]; both the config file and the
/// command-line flags fill one of these, and flags win on merge.
#[derive(Debug, Clone, Default)]
pub struct PartialRunConfig {
    pub problem: Option<String>,
    pub optimizer: Option<String>,
    pub lr: Option<f64>,
    pub lr_grid: Option<bool>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub partition: Option<String>,
    pub refresh: Option<u64>,
    pub eps: Option<f64>,
    pub eig_floor: Option<f64>,
    pub scaled_u: Option<bool>,
    pub timing: Option<bool>,
    pub loss_log: Option<String>,
    pub out: Option<PathBuf>,
    pub quad_dim: Option<usize>,
    pub quad_coupling: Option<f64>,
    pub quad_blocks: Option<usize>,
    pub init: Option<String>,
    pub mlp_hidden: Option<Vec<usize>>,
    pub blob_dim: Option<usize>,
    pub blob_spread: Option<f64>,
    pub train_n: Option<usize>,
    pub test_n: Option<usize>,
    pub mnist_train: Option<usize>,
    pub mnist_test: Option<usize>,
}

impl PartialRunConfig {
    /// `other` provides fallbacks for anything unset here.
    pub fn or(mut self, other: PartialRunConfig) -> PartialRunConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if self.$field.is_none() { self.$field = other.$field; })*
            };
        }
        take!(
            problem,
            optimizer,
            lr,
            lr_grid,
            epochs,
            batch,
            seed,
            partition,
            refresh,
            eps,
            eig_floor,
            scaled_u,
            timing,
            loss_log,
            out,
            quad_dim,
            quad_coupling,
            quad_blocks,
            init,
            mlp_hidden,
            blob_dim,
            blob_spread,
            train_n,
            test_n,
            mnist_train,
            mnist_test
        );
        self
    }

    /// Applies defaults and validates cross-field constraints.
    pub fn resolve(self) -> Result<RunConfig> {
        let problem = ProblemKind::parse(
            self.problem
                .as_deref()
                .ok_or_else(|| Error::Usage("missing required option 'problem'".into()))?,
        )?;
        let optimizer = OptimizerKind::parse(
            self.optimizer
                .as_deref()
                .ok_or_else(|| Error::Usage("missing required option 'optimizer'".into()))?,
        )?;
        let lrs = if self.lr_grid.unwrap_or(false) {
            if self.lr.is_some() {
                return Err(Error::Usage("pass either lr or lr-grid, not both".into()));
            }
            LR_GRID.to_vec()
        } else {
            vec![self.lr.unwrap_or(1e-2)]
        };
        let granularity = match self.partition.as_deref().unwrap_or("layer") {
            "layer" => models::Granularity::Layer,
            "unit" => models::Granularity::Unit,
            other => {
                return Err(Error::Usage(format!(
                    "unknown partition granularity '{other}'"
                )))
            }
        };
        let init = match self.init.as_deref().unwrap_or("random") {
            "random" => InitKind::Random,
            "worst" => InitKind::Worst,
            other => return Err(Error::Usage(format!("unknown init '{other}'"))),
        };
        let loss_log = match self.loss_log.as_deref().unwrap_or("auto") {
            "auto" => LossLog::Auto,
            "full" => LossLog::Full,
            "batch" => LossLog::Batch,
            other => return Err(Error::Usage(format!("unknown loss-log mode '{other}'"))),
        };
        let config = RunConfig {
            problem,
            optimizer,
            lrs,
            epochs: self.epochs.unwrap_or(20),
            batch: self.batch.unwrap_or(64),
            seed: self.seed.unwrap_or(7),
            granularity,
            refresh: self.refresh.unwrap_or(1).max(1),
            eps: self.eps.unwrap_or(1e-8),
            eig_floor: self.eig_floor.unwrap_or(1e-7),
            scaled_u: self.scaled_u.unwrap_or(false),
            timing: self.timing.unwrap_or(false),
            loss_log,
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            quad_dim: self.quad_dim.unwrap_or(40),
            quad_coupling: self.quad_coupling.unwrap_or(0.8),
            quad_blocks: self.quad_blocks.unwrap_or(2),
            init: init_checked(init, problem)?,
            mlp_hidden: self.mlp_hidden.unwrap_or_else(|| vec![12, 10]),
            blob_dim: self.blob_dim.unwrap_or(16),
            blob_spread: self.blob_spread.unwrap_or(0.25),
            train_n: self.train_n.unwrap_or(600),
            test_n: self.test_n.unwrap_or(300),
            mnist_train: self.mnist_train.unwrap_or(2000),
            mnist_test: self.mnist_test.unwrap_or(1000),
        };
        if config.epochs == 0 || config.batch == 0 {
            return Err(Error::Usage("epochs and batch must be positive".into()));
        }
        if config.optimizer == OptimizerKind::Newton && config.problem != ProblemKind::Quadratic {
            return Err(Error::Usage(
                "newton is only available on the quadratic problem (analytic Hessian)".into(),
            ));
        }
        if config.optimizer == OptimizerKind::GdLs && config.problem != ProblemKind::Quadratic {
            return Err(Error::Usage(
                "exact line search is only available on the quadratic problem".into(),
            ));
        }
        Ok(config)
    }
}

fn init_checked(init: InitKind, problem: ProblemKind) -> Result<InitKind> {
    if init == InitKind::Worst && problem != ProblemKind::Quadratic {
        return Err(Error::Usage(
            "init=worst only applies to the quadratic problem".into(),
        ));
    }
    Ok(init)
}

/// Parses the line-oriented `key = value` config file. `#` starts a comment;
/// unknown keys are usage errors.
pub fn parse_config_file(path: &Path) -> Result<PartialRunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<PartialRunConfig> {
    let mut out = PartialRunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config line {}: expected key = value", idx + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |e: &dyn std::fmt::Display| {
            Error::Usage(format!("config line {}: bad {key}: {e}", idx + 1))
        };
        match key {
            "problem" => out.problem = Some(value.into()),
            "optimizer" => out.optimizer = Some(value.into()),
            "lr" => out.lr = Some(value.parse().map_err(|e| bad(&e))?),
            "lr-grid" => out.lr_grid = Some(value.parse().map_err(|e| bad(&e))?),
            "epochs" => out.epochs = Some(value.parse().map_err(|e| bad(&e))?),
            "batch" => out.batch = Some(value.parse().map_err(|e| bad(&e))?),
            "seed" => out.seed = Some(value.parse().map_err(|e| bad(&e))?),
            "partition" => out.partition = Some(value.into()),
            "refresh" => out.refresh = Some(value.parse().map_err(|e| bad(&e))?),
            "eps" => out.eps = Some(value.parse().map_err(|e| bad(&e))?),
            "eig-floor" => out.eig_floor = Some(value.parse().map_err(|e| bad(&e))?),
            "scaled-u" => out.scaled_u = Some(value.parse().map_err(|e| bad(&e))?),
            "timing" => out.timing = Some(value.parse().map_err(|e| bad(&e))?),
            "loss-log" => out.loss_log = Some(value.into()),
            "out" => out.out = Some(PathBuf::from(value)),
            "quad-dim" => out.quad_dim = Some(value.parse().map_err(|e| bad(&e))?),
            "quad-coupling" => out.quad_coupling = Some(value.parse().map_err(|e| bad(&e))?),
            "quad-blocks" => out.quad_blocks = Some(value.parse().map_err(|e| bad(&e))?),
            "init" => out.init = Some(value.into()),
            "mlp-hidden" => out.mlp_hidden = Some(parse_usize_list(value).map_err(|e| bad(&e))?),
            "blob-dim" => out.blob_dim = Some(value.parse().map_err(|e| bad(&e))?),
            "blob-spread" => out.blob_spread = Some(value.parse().map_err(|e| bad(&e))?),
            "train-n" => out.train_n = Some(value.parse().map_err(|e| bad(&e))?),
            "test-n" => out.test_n = Some(value.parse().map_err(|e| bad(&e))?),
            "mnist-train" => out.mnist_train = Some(value.parse().map_err(|e| bad(&e))?),
            "mnist-test" => out.mnist_test = Some(value.parse().map_err(|e| bad(&e))?),
            other => {
                return Err(Error::Usage(format!(
                    "config line {}: unknown key '{other}'",
                    idx + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn parse_usize_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|e| format!("'{tok}': {e}"))
        })
        .collect()
}

/// Configuration for the `fisher` subcommand.
#[derive(Debug, Clone)]
pub struct FisherConfig {
    pub steps: usize,
    pub granularities: Vec<FisherGranularity>,
    pub normalized: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub mlp_hidden: Vec<usize>,
    pub blob_dim: usize,
    pub blob_classes: usize,
    pub blob_spread: f64,
    pub train_n: usize,
    pub max_samples: usize,
    pub lr: f64,
    pub batch: usize,
}

impl Default for FisherConfig {
    fn default() -> Self {
        Self {
            steps: 30,
            granularities: vec![FisherGranularity::Layer, FisherGranularity::Unit],
            normalized: false,
            out: PathBuf::from("out"),
            seed: 7,
            mlp_hidden: vec![12, 10],
            blob_dim: 16,
            blob_classes: 3,
            blob_spread: 0.25,
            train_n: 600,
            max_samples: 600,
            lr: 0.1,
            batch: 64,
        }
    }
}
