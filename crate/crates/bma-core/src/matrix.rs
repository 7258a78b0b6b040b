use smalldense::{jacobi_eig, DenseMatrix, SymEig};

use crate::{dimension_error, Error, Partition, Result, SYMMETRY_TOL};

/// A matrix represented on a [`Partition`] by per-block diagonal
/// coefficients `lambda` (length `L`) and an `L x L` block-constant
/// coefficient matrix `b`. The represented `d x d` matrix is the sum of the
/// diagonal expansion of `lambda` and the full expansion of `b`; it is never
/// materialized by the arithmetic in this module.
#[derive(Debug, Clone, PartialEq)]
pub struct BmaMatrix {
    partition: Partition,
    lambda: Vec<f64>,
    b: DenseMatrix,
    symmetric: bool,
}

impl BmaMatrix {
    /// General (possibly non-symmetric) block-mean matrix.
    pub fn new(partition: Partition, lambda: Vec<f64>, b: DenseMatrix) -> Result<Self> {
        Self::build(partition, lambda, b, false)
    }

    /// Block-mean matrix flagged symmetric; `b` must satisfy
    /// `|b_ij - b_ji| <= 1e-12` for all pairs. Only symmetric matrices admit
    /// the eigendecomposition-based inverse and root operations.
    pub fn new_symmetric(partition: Partition, lambda: Vec<f64>, b: DenseMatrix) -> Result<Self> {
        let asym = b.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Self::build(partition, lambda, b, true)
    }

    pub(crate) fn build(
        partition: Partition,
        lambda: Vec<f64>,
        b: DenseMatrix,
        symmetric: bool,
    ) -> Result<Self> {
        let l = partition.block_count();
        if lambda.len() != l {
            return Err(dimension_error(
                "BmaMatrix::new",
                format!(
                    "lambda has {} entries, partition has {l} blocks",
                    lambda.len()
                ),
            ));
        }
        if b.rows() != l || b.cols() != l {
            return Err(dimension_error(
                "BmaMatrix::new",
                format!("b is {}x{}, expected {l}x{l}", b.rows(), b.cols()),
            ));
        }
        Ok(Self {
            partition,
            lambda,
            b,
            symmetric,
        })
    }

    /// Identity matrix on the given partition (`lambda = 1`, `b = 0`).
    pub fn identity(partition: Partition) -> Self {
        let l = partition.block_count();
        Self {
            lambda: vec![1.0; l],
            b: DenseMatrix::zeros(l, l),
            partition,
            symmetric: true,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Materializes the represented `d x d` matrix. Test-scale only.
    pub fn expand(&self) -> DenseMatrix {
        let p = &self.partition;
        let d = p.dim();
        let l = p.block_count();
        let mut out = DenseMatrix::zeros(d, d);
        for i in 0..l {
            for j in 0..l {
                let bij = self.b.get(i, j);
                for r in p.range(i) {
                    for c in p.range(j) {
                        out.set(r, c, bij);
                    }
                }
            }
            let lam = self.lambda[i];
            for r in p.range(i) {
                out.set(r, r, out.get(r, r) + lam);
            }
        }
        out
    }

    /// Matrix-vector product without expansion: block `i` of the result is
    /// `lambda_i * v_i + sum_j b_ij * sum(v_j)`. Costs `O(d + L^2)`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let p = &self.partition;
        let d = p.dim();
        if v.len() != d {
            return Err(dimension_error(
                "matvec",
                format!("vector has {} entries, matrix dimension is {d}", v.len()),
            ));
        }
        let l = p.block_count();
        let block_sums: Vec<f64> = (0..l).map(|j| v[p.range(j)].iter().sum()).collect();
        let mut out = vec![0.0; d];
        for i in 0..l {
            let mut coupling = 0.0;
            for j in 0..l {
                coupling += self.b.get(i, j) * block_sums[j];
            }
            let lam = self.lambda[i];
            for idx in p.range(i) {
                out[idx] = lam * v[idx] + coupling;
            }
        }
        Ok(out)
    }

    /// Exact inverse, computed from an `L x L` eigenproblem.
    ///
    /// For a positive definite represented matrix the inverse stays in the
    /// family: the new diagonal coefficients are `1/lambda_i` and the new
    /// block coefficients are `(ΛS + SBS)^{-1} - (ΛS)^{-1}` where
    /// `S = diag(block sizes)`. Requires the symmetric flag (the block system
    /// is solved by eigendecomposition) and nonzero `lambda`.
    pub fn inverse(&self) -> Result<BmaMatrix> {
        self.require_symmetric()?;
        self.require_nonzero_lambda()?;
        let l = self.partition.block_count();
        let sizes = self.partition.sizes();

        // inner = ΛS + SBS, symmetric because b is.
        let mut inner = DenseMatrix::zeros(l, l);
        for i in 0..l {
            for j in 0..l {
                let v = sizes[i] as f64 * self.b.get(i, j) * sizes[j] as f64;
                inner.set(i, j, v);
            }
            let si = sizes[i] as f64;
            inner.set(i, i, inner.get(i, i) + self.lambda[i] * si);
        }
        let eig = jacobi_eig(&inner)?;
        let min_eig = *eig.eigenvalues.last().expect("at least one block");
        if min_eig <= 0.0 {
            return Err(Error::Singular {
                min_eigenvalue: min_eig,
            });
        }
        let mut d = reconstruct_with(&eig, |v| 1.0 / v);
        for i in 0..l {
            let lam_s = self.lambda[i] * sizes[i] as f64;
            d.set(i, i, d.get(i, i) - 1.0 / lam_s);
        }
        let lambda_inv = self.lambda.iter().map(|&x| 1.0 / x).collect();
        BmaMatrix::build(self.partition.clone(), lambda_inv, d, true)
    }

    /// Principal square root, computed from an `L x L` eigenproblem.
    ///
    /// Requires the symmetric flag, `lambda > 0` and a positive definite
    /// represented matrix. The root stays in the family with diagonal
    /// coefficients `sqrt(lambda_i)`.
    pub fn sqrt(&self) -> Result<BmaMatrix> {
        self.root_impl(0.5)
    }

    /// Principal inverse square root; preconditions as [`BmaMatrix::sqrt`].
    pub fn inv_sqrt(&self) -> Result<BmaMatrix> {
        self.root_impl(-0.5)
    }

    fn root_impl(&self, exponent: f64) -> Result<BmaMatrix> {
        self.require_symmetric()?;
        if let Some((index, &value)) = self.lambda.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            let _ = index;
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: value,
            });
        }
        let l = self.partition.block_count();
        let sizes = self.partition.sizes();

        // inner = Λ + S^{1/2} B S^{1/2}, symmetric.
        let sqrt_s: Vec<f64> = sizes.iter().map(|&s| (s as f64).sqrt()).collect();
        let mut inner = DenseMatrix::zeros(l, l);
        for i in 0..l {
            for j in 0..l {
                inner.set(i, j, sqrt_s[i] * self.b.get(i, j) * sqrt_s[j]);
            }
            inner.set(i, i, inner.get(i, i) + self.lambda[i]);
        }
        let eig = jacobi_eig(&inner)?;
        let min_eig = *eig.eigenvalues.last().expect("at least one block");
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            });
        }
        let root = reconstruct_with(&eig, |v| v.powf(exponent));

        // D = S^{-1/2} [root - Λ^exponent] S^{-1/2}
        let mut d = DenseMatrix::zeros(l, l);
        for i in 0..l {
            for j in 0..l {
                let mut v = root.get(i, j);
                if i == j {
                    v -= self.lambda[i].powf(exponent);
                }
                d.set(i, j, v / (sqrt_s[i] * sqrt_s[j]));
            }
        }
        let lambda_out = self.lambda.iter().map(|&x| x.powf(exponent)).collect();
        BmaMatrix::build(self.partition.clone(), lambda_out, d, true)
    }

    fn require_symmetric(&self) -> Result<()> {
        if !self.symmetric {
            return Err(Error::NotSymmetric {
                max_asymmetry: self.b.max_asymmetry(),
            });
        }
        Ok(())
    }

    fn require_nonzero_lambda(&self) -> Result<()> {
        for (index, &value) in self.lambda.iter().enumerate() {
            if value.abs() < 1e-300 {
                return Err(Error::ZeroLambda { index, value });
            }
        }
        Ok(())
    }
}

/// `R diag(f(v)) Rᵀ` from an eigendecomposition.
fn reconstruct_with(eig: &SymEig, f: impl Fn(f64) -> f64) -> DenseMatrix {
    let n = eig.eigenvalues.len();
    let r = &eig.eigenvectors;
    let mut out = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let w = f(eig.eigenvalues[k]);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let rik = r.get(i, k) * w;
            if rik == 0.0 {
                continue;
            }
            for j in 0..n {
                out.set(i, j, out.get(i, j) + rik * r.get(j, k));
            }
        }
    }
    out
}

/// Diagonal expansion: `d x d` block-diagonal matrix whose block `i` is
/// `lambda_i` times the `s_i x s_i` identity.
pub fn expand_diag(lambda: &[f64], p: &Partition) -> Result<DenseMatrix> {
    if lambda.len() != p.block_count() {
        return Err(dimension_error(
            "expand_diag",
            format!(
                "lambda has {} entries, partition has {} blocks",
                lambda.len(),
                p.block_count()
            ),
        ));
    }
    let mut out = DenseMatrix::zeros(p.dim(), p.dim());
    for (i, &lam) in lambda.iter().enumerate() {
        for r in p.range(i) {
            out.set(r, r, lam);
        }
    }
    Ok(out)
}

/// Full expansion: `d x d` matrix whose block `(i, j)` is the constant
/// `s_i x s_j` block of value `b_ij`.
pub fn expand_full(b: &DenseMatrix, p: &Partition) -> Result<DenseMatrix> {
    let l = p.block_count();
    if b.rows() != l || b.cols() != l {
        return Err(dimension_error(
            "expand_full",
            format!("b is {}x{}, partition has {l} blocks", b.rows(), b.cols()),
        ));
    }
    let mut out = DenseMatrix::zeros(p.dim(), p.dim());
    for i in 0..l {
        for j in 0..l {
            let bij = b.get(i, j);
            if bij == 0.0 {
                continue;
            }
            for r in p.range(i) {
                for c in p.range(j) {
                    out.set(r, c, bij);
                }
            }
        }
    }
    Ok(out)
}
