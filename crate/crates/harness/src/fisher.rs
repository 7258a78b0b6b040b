use bma_core::{best_fit, frobenius_error, ErrorMode, Partition};
use data_io::synth_blobs;
use models::{empirical_fisher, partition_for_model, Granularity, MlpModel};
use optim::AdaGradDiagState;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{FisherConfig, FisherGranularity};
use crate::{Error, Result};

/// Dense Fisher analysis is refused above this dimension.
pub const FISHER_DIM_GUARD: usize = 2000;

#[derive(Debug, Clone)]
pub struct GranularityReport {
    pub granularity: FisherGranularity,
    pub blocks: usize,
    pub mse_raw: f64,
    pub mse_normalized: f64,
}

#[derive(Debug, Clone)]
pub struct FisherReport {
    pub dim: usize,
    pub per_granularity: Vec<GranularityReport>,
    /// Human-readable lines, one per granularity plus the closing sequence.
    pub lines: Vec<String>,
}

/// Trains a small tanh network briefly on seeded blobs, computes its
/// empirical Fisher information matrix, fits it at each requested partition
/// granularity, and dumps the matrix, the fit coefficients and the error
/// sequence under `out`.
pub fn run_fisher_analysis(config: &FisherConfig) -> Result<FisherReport> {
    let mut chain = Vec::with_capacity(config.mlp_hidden.len() + 2);
    chain.push(config.blob_dim);
    chain.extend_from_slice(&config.mlp_hidden);
    chain.push(config.blob_classes);
    let model = MlpModel::new(chain)?;
    let dim = model.param_count();
    if dim > FISHER_DIM_GUARD {
        return Err(Error::Usage(format!(
            "fisher analysis refused at dimension {dim} (guard: {FISHER_DIM_GUARD})"
        )));
    }

    let ds = synth_blobs(
        config.train_n,
        config.blob_dim,
        config.blob_classes,
        config.blob_spread,
        config.seed,
    )?;
    let mut theta = model.init_params(config.seed);

    // Brief training pass so the Fisher is taken away from the random init.
    let mut optimizer = AdaGradDiagState::new(dim, config.lr, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..ds.n).collect();
    let mut taken = 0usize;
    'train: loop {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch) {
            if taken >= config.steps {
                break 'train;
            }
            let mut inputs = Vec::with_capacity(batch.len() * ds.p);
            let mut labels = Vec::with_capacity(batch.len());
            for &i in batch {
                inputs.extend_from_slice(ds.sample(i));
                labels.push(ds.labels[i]);
            }
            let (_, grad) = model.loss_grad(&theta, &inputs, &labels)?;
            optimizer.step(&mut theta, &grad)?;
            taken += 1;
        }
    }

    let fisher = empirical_fisher(&model, &theta, &ds.inputs, &ds.labels, config.max_samples)?;
    std::fs::create_dir_all(&config.out)?;
    fisher.save_text(&config.out.join("fisher.txt"))?;

    let mut report = FisherReport {
        dim,
        per_granularity: Vec::new(),
        lines: Vec::new(),
    };
    for &granularity in &config.granularities {
        let partition = match granularity {
            FisherGranularity::Layer => partition_for_model(&model, Granularity::Layer).0,
            FisherGranularity::Unit => partition_for_model(&model, Granularity::Unit).0,
            FisherGranularity::Singleton => Partition::singletons(dim)?,
        };
        let fit = best_fit(&fisher, &partition)?;
        let mse_raw = frobenius_error(&fisher, &fit, ErrorMode::SquaredFrobenius)?;
        let mse_normalized = frobenius_error(&fisher, &fit, ErrorMode::Mse)?;

        let tag = granularity.name();
        let lambda_matrix =
            smalldense::DenseMatrix::from_vec(fit.lambda().len(), 1, fit.lambda().to_vec())
                .expect("column vector");
        lambda_matrix.save_text(&config.out.join(format!("bma_{tag}_lambda.txt")))?;
        fit.b()
            .save_text(&config.out.join(format!("bma_{tag}_b.txt")))?;
        std::fs::write(
            config.out.join(format!("bma_{tag}_partition.txt")),
            format!("{}\n", partition),
        )?;

        report.lines.push(format!(
            "granularity={tag} blocks={} mse_raw={mse_raw} mse_normalized={mse_normalized}",
            partition.block_count()
        ));
        report.per_granularity.push(GranularityReport {
            granularity,
            blocks: partition.block_count(),
            mse_raw,
            mse_normalized,
        });
    }

    let sequence: Vec<String> = report
        .per_granularity
        .iter()
        .map(|g| {
            let value = if config.normalized {
                g.mse_normalized
            } else {
                g.mse_raw
            };
            format!("{}={}", g.granularity.name(), value)
        })
        .collect();
    report
        .lines
        .push(format!("mse sequence: {}", sequence.join(" -> ")));
    Ok(report)
}
