use smalldense::DenseMatrix;

use crate::{dimension_error, Error, MlpModel, Result};

/// Dense Fisher matrices above this dimension are refused.
pub const FISHER_DIM_GUARD: usize = 2000;

/// Empirical Fisher information: the mean over samples of the per-sample
/// loss-gradient outer products, with gradients taken at batch size one.
///
/// Accumulation is chunked with a fixed, data-shape-derived chunk plan and
/// the partial sums are combined in chunk order, so the result is identical
/// whether the chunks are evaluated sequentially or in parallel (the
/// `parallel` feature distributes them over rayon).
pub fn empirical_fisher(
    model: &MlpModel,
    theta: &[f64],
    inputs: &[f64],
    labels: &[usize],
    max_samples: usize,
) -> Result<DenseMatrix> {
    let d = model.param_count();
    if d > FISHER_DIM_GUARD {
        return Err(Error::Capacity {
            dim: d,
            max: FISHER_DIM_GUARD,
        });
    }
    let p = model.input_dim();
    if inputs.len() != labels.len() * p {
        return Err(dimension_error(
            "empirical_fisher",
            format!(
                "inputs has {} values for {} labels x {p}",
                inputs.len(),
                labels.len()
            ),
        ));
    }
    let n = labels.len().min(max_samples);
    if n == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }

    let chunk = chunk_size(n, d);
    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(chunk)
        .map(|start| (start, (start + chunk).min(n)))
        .collect();

    let partial = |&(start, end): &(usize, usize)| -> Result<DenseMatrix> {
        let mut acc = DenseMatrix::zeros(d, d);
        for sample in start..end {
            let x = &inputs[sample * p..(sample + 1) * p];
            let grad = model.sample_grad(theta, x, labels[sample])?;
            acc.add_scaled_outer(&grad, 1.0)?;
        }
        Ok(acc)
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<Result<DenseMatrix>> = {
        use rayon::prelude::*;
        ranges.par_iter().map(partial).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<DenseMatrix>> = ranges.iter().map(partial).collect();

    let mut total = DenseMatrix::zeros(d, d);
    for part in partials {
        total.add_assign(&part?)?;
    }
    total.scale_in_place(1.0 / n as f64);
    Ok(total)
}

/// Chunk plan depends only on the sample count and dimension, keeping the
/// reduction order reproducible while bounding the memory held in partials.
/// Chunks carry at least 64 samples so the per-chunk `d x d` partial and its
/// merge stay small next to the gradient work.
fn chunk_size(n: usize, d: usize) -> usize {
    let per_partial_bytes = 8 * d * d;
    let max_partials = ((256 << 20) / per_partial_bytes.max(1)).clamp(1, 32);
    n.div_ceil(max_partials).max(64)
}
