use bma_core::Partition;
use smalldense::{clamped_matrix_power, DenseMatrix};

use crate::{check_len, Error, Result};

/// AdaGrad with a block-mean preconditioner.
///
/// Per-coordinate scale comes from the usual running sum of squared
/// gradients `r`. Cross-block structure comes from the running outer product
/// `U = sum u u'` of gradient block sums, turned each step (or each
/// `refresh_interval` steps, with the result cached between refreshes) into a
/// small correction matrix `D`:
///
/// ```text
/// z = sqrt(r + eps)            (elementwise)
/// u_i = sum of g over block i,  v_i = sum of z over block i
/// K = I + (U - diag U) / (v v')  (elementwise division, symmetrized)
/// D = S^{-1/2} [K^{-1/2} - I] S^{-1/2}        S = diag(block sizes)
/// ```
///
/// The update scales by `Z^{-1/2}`, adds `sum_j D_ij u_j` to every entry of
/// block `i`, scales by `Z^{-1/2}` again and takes a gradient step, for a
/// per-step cost of `O(L^3 + d)`.
///
/// By default `u` is taken from the raw gradient, before any scaling. The
/// `scaled_u` mode instead block-sums the once-scaled gradient when applying
/// `D`, which matches reading the update as a symmetric split
/// `Z^{-1/2}(I + D-bar)Z^{-1/2} g`.
#[derive(Debug, Clone)]
pub struct AdaGradBmaState {
    partition: Partition,
    r: Vec<f64>,
    u_outer: DenseMatrix,
    t: u64,
    eta: f64,
    eps: f64,
    eig_floor: f64,
    refresh_interval: u64,
    cached_d: Option<DenseMatrix>,
    scaled_u: bool,
}

impl AdaGradBmaState {
    pub fn new(
        partition: Partition,
        eta: f64,
        eps: f64,
        eig_floor: f64,
        refresh_interval: u64,
    ) -> Self {
        let d = partition.dim();
        let l = partition.block_count();
        Self {
            partition,
            r: vec![0.0; d],
            u_outer: DenseMatrix::zeros(l, l),
            t: 0,
            eta,
            eps,
            eig_floor,
            refresh_interval: refresh_interval.max(1),
            cached_d: None,
            scaled_u: false,
        }
    }

    /// Applies the block correction to block sums of the once-scaled gradient
    /// instead of the raw gradient.
    pub fn with_scaled_u(mut self, scaled_u: bool) -> Self {
        self.scaled_u = scaled_u;
        self
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Accumulated outer product of gradient block sums.
    pub fn u_outer(&self) -> &DenseMatrix {
        &self.u_outer
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// The block correction matrix from the current accumulators.
    ///
    /// `v` is recomputed from the current `r`; it is strictly positive
    /// whenever `eps > 0`, and guarded here regardless.
    pub fn compute_d(&self) -> Result<DenseMatrix> {
        let l = self.partition.block_count();
        let v = self.block_sums(&self.z())?;
        if let Some((i, &vi)) = v.iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(Error::InvalidState(format!(
                "block scale v[{i}] = {vi:e} is not positive"
            )));
        }
        let mut k = DenseMatrix::identity(l);
        for i in 0..l {
            for j in 0..l {
                if i == j {
                    continue;
                }
                k.set(i, j, self.u_outer.get(i, j) / (v[i] * v[j]));
            }
        }
        let k = k.symmetrized();
        let root = clamped_matrix_power(&k, -0.5, self.eig_floor)?;
        let mut d = DenseMatrix::zeros(l, l);
        for i in 0..l {
            let si = (self.partition.sizes()[i] as f64).sqrt();
            for j in 0..l {
                let sj = (self.partition.sizes()[j] as f64).sqrt();
                let mut val = root.get(i, j);
                if i == j {
                    val -= 1.0;
                }
                d.set(i, j, val / (si * sj));
            }
        }
        Ok(d)
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) -> Result<()> {
        let dim = self.partition.dim();
        check_len("adagrad_bma_step", dim, grad.len())?;
        check_len("adagrad_bma_step", theta.len(), grad.len())?;

        for (r, &g) in self.r.iter_mut().zip(grad) {
            *r += g * g;
        }
        let z = self.z();
        let u = self.block_sums(grad)?;
        self.u_outer.add_scaled_outer(&u, 1.0)?;

        if self.t.is_multiple_of(self.refresh_interval) || self.cached_d.is_none() {
            self.cached_d = Some(self.compute_d()?);
        }
        let d_mat = self.cached_d.as_ref().expect("just populated");

        let mut work: Vec<f64> = grad.iter().zip(&z).map(|(&g, &zm)| g / zm.sqrt()).collect();
        let applied_u = if self.scaled_u {
            self.block_sums(&work)?
        } else {
            u
        };
        let l = self.partition.block_count();
        for i in 0..l {
            let mut coupling = 0.0;
            for j in 0..l {
                coupling += d_mat.get(i, j) * applied_u[j];
            }
            for idx in self.partition.range(i) {
                work[idx] += coupling;
            }
        }
        for (w, &zm) in work.iter_mut().zip(&z) {
            *w /= zm.sqrt();
        }
        for (t, w) in theta.iter_mut().zip(&work) {
            *t -= self.eta * w;
        }
        self.t += 1;
        Ok(())
    }

    fn z(&self) -> Vec<f64> {
        self.r.iter().map(|&r| (r + self.eps).sqrt()).collect()
    }

    fn block_sums(&self, values: &[f64]) -> Result<Vec<f64>> {
        check_len("block_sums", self.partition.dim(), values.len())?;
        Ok((0..self.partition.block_count())
            .map(|i| values[self.partition.range(i)].iter().sum())
            .collect())
    }
}
