use smalldense::DenseMatrix;

use crate::{dimension_error, BmaMatrix, Partition, Result, SYMMETRY_TOL};

/// Whether [`frobenius_error`] reports the squared Frobenius norm of the
/// residual or that quantity divided by `d^2` (the mean square error per
/// entry).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    SquaredFrobenius,
    /// Squared Frobenius error divided by `d^2`.
    Mse,
}

/// Running mean that reproduces a constant input exactly: after the first
/// sample the correction term is zero for identical values, so fitting the
/// expansion of a block-mean matrix recovers its coefficients bit for bit.
#[derive(Default)]
struct RunningMean {
    mean: f64,
    count: u64,
}

impl RunningMean {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.mean += (x - self.mean) / self.count as f64;
    }

    fn value(&self) -> f64 {
        self.mean
    }
}

/// Optimal block-mean fit of a square matrix on a partition, minimizing the
/// Frobenius distance over the family.
///
/// For off-diagonal blocks the coefficient is the block mean. For a diagonal
/// block the constant coefficient is the mean of the off-diagonal entries
/// (zero for singleton blocks) and the diagonal coefficient is the mean
/// diagonal minus that constant.
///
/// The returned matrix is flagged symmetric when the fitted coefficients
/// happen to be symmetric within the construction tolerance, which is always
/// the case when `m` itself is symmetric.
pub fn best_fit(m: &DenseMatrix, p: &Partition) -> Result<BmaMatrix> {
    let d = p.dim();
    if !m.is_square() || m.rows() != d {
        return Err(dimension_error(
            "best_fit",
            format!(
                "matrix is {}x{}, partition dimension is {d}",
                m.rows(),
                m.cols()
            ),
        ));
    }
    let l = p.block_count();
    let sizes = p.sizes();
    let mut lambda = vec![0.0; l];
    let mut b = DenseMatrix::zeros(l, l);

    for i in 0..l {
        for j in 0..l {
            if i == j {
                continue;
            }
            let mut mean = RunningMean::default();
            for r in p.range(i) {
                for c in p.range(j) {
                    mean.push(m.get(r, c));
                }
            }
            b.set(i, j, mean.value());
        }
        let range = p.range(i);
        let mut diag_mean = RunningMean::default();
        for r in range.clone() {
            diag_mean.push(m.get(r, r));
        }
        if sizes[i] == 1 {
            // Singleton diagonal block: the constant term stays zero and the
            // diagonal coefficient carries the whole entry.
            lambda[i] = diag_mean.value();
        } else {
            let mut off_mean = RunningMean::default();
            for r in range.clone() {
                for c in range.clone() {
                    if r != c {
                        off_mean.push(m.get(r, c));
                    }
                }
            }
            b.set(i, i, off_mean.value());
            lambda[i] = diag_mean.value() - off_mean.value();
        }
    }

    let symmetric = b.max_asymmetry() <= SYMMETRY_TOL;
    BmaMatrix::build(p.clone(), lambda, b, symmetric)
}

/// Squared Frobenius distance between `m` and the expansion of `approx`,
/// streamed block by block so no `d x d` intermediate is allocated.
pub fn frobenius_error(m: &DenseMatrix, approx: &BmaMatrix, mode: ErrorMode) -> Result<f64> {
    let p = approx.partition();
    let d = p.dim();
    if !m.is_square() || m.rows() != d {
        return Err(dimension_error(
            "frobenius_error",
            format!(
                "matrix is {}x{}, approximation dimension is {d}",
                m.rows(),
                m.cols()
            ),
        ));
    }
    let l = p.block_count();
    // Neumaier-compensated accumulation keeps the streamed sum faithful for
    // matrices up to the capacity guard sizes.
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut push = |x: f64| {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    };
    for i in 0..l {
        for j in 0..l {
            let bij = approx.b().get(i, j);
            if i == j {
                let lam = approx.lambda()[i];
                for r in p.range(i) {
                    for c in p.range(j) {
                        let predicted = if r == c { lam + bij } else { bij };
                        let diff = m.get(r, c) - predicted;
                        push(diff * diff);
                    }
                }
            } else {
                for r in p.range(i) {
                    for c in p.range(j) {
                        let diff = m.get(r, c) - bij;
                        push(diff * diff);
                    }
                }
            }
        }
    }
    let total = sum + comp;
    Ok(match mode {
        ErrorMode::SquaredFrobenius => total,
        ErrorMode::Mse => total / (d as f64 * d as f64),
    })
}
