use smalldense::{clamped_matrix_power, DenseMatrix};

use crate::{check_len, Result};

/// Full-matrix AdaGrad: accumulates the gradient outer product
/// `H = sum g g'` and preconditions with `(H + eps I)^{-1/2}`, computed by
/// eigendecomposition with eigenvalue clamping. `O(d^3)` per step, so this is
/// a test-scale reference, not a production optimizer.
///
/// On the first step with `eps = 0` the damped matrix is the rank-one
/// `g g'`; its pseudo-inverse square root maps `g` to a unit-magnitude step
/// along `g`, while the `d - 1` null directions are governed entirely by the
/// clamp floor.
#[derive(Debug, Clone)]
pub struct AdaGradFullState {
    h: DenseMatrix,
    eta: f64,
    eps: f64,
    eig_floor: f64,
    t: u64,
}

impl AdaGradFullState {
    pub fn new(dim: usize, eta: f64, eps: f64, eig_floor: f64) -> Self {
        Self {
            h: DenseMatrix::zeros(dim, dim),
            eta,
            eps,
            eig_floor,
            t: 0,
        }
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) -> Result<()> {
        check_len("adagrad_full_step", self.h.rows(), grad.len())?;
        check_len("adagrad_full_step", theta.len(), grad.len())?;
        self.h.add_scaled_outer(grad, 1.0)?;
        let mut damped = self.h.clone();
        for i in 0..damped.rows() {
            damped.set(i, i, damped.get(i, i) + self.eps);
        }
        let precond = clamped_matrix_power(&damped, -0.5, self.eig_floor)?;
        let direction = precond.matvec(grad)?;
        for (t, d) in theta.iter_mut().zip(&direction) {
            *t -= self.eta * d;
        }
        self.t += 1;
        Ok(())
    }
}

/// Diagonal AdaGrad: per-coordinate running sum of squared gradients `r`,
/// update `theta_i -= eta * g_i / sqrt(r_i + eps)`.
#[derive(Debug, Clone)]
pub struct AdaGradDiagState {
    r: Vec<f64>,
    eta: f64,
    eps: f64,
    t: u64,
}

impl AdaGradDiagState {
    pub fn new(dim: usize, eta: f64, eps: f64) -> Self {
        Self {
            r: vec![0.0; dim],
            eta,
            eps,
            t: 0,
        }
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) -> Result<()> {
        check_len("adagrad_diag_step", self.r.len(), grad.len())?;
        check_len("adagrad_diag_step", theta.len(), grad.len())?;
        for ((r, t), &g) in self.r.iter_mut().zip(theta.iter_mut()).zip(grad) {
            *r += g * g;
            *t -= self.eta * g / (*r + self.eps).sqrt();
        }
        self.t += 1;
        Ok(())
    }
}
