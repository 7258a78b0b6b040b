use smalldense::{jacobi_eig, DenseMatrix, SymEig};

use crate::{dimension_error, Error, Result};

/// The quadratic objective `f(theta) = theta' Q theta / 2` for a symmetric
/// positive definite `Q`. The eigendecomposition is computed once at
/// construction; it backs reparameterization and the worst-case start.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    q: DenseMatrix,
    eig: SymEig,
}

/// Invertible change of variables decoupling a quadratic: forward map
/// `theta -> Lambda^{1/2} U' theta` and its inverse.
#[derive(Debug, Clone)]
pub struct Reparameterization {
    to_xi: DenseMatrix,
    to_theta: DenseMatrix,
}

impl Reparameterization {
    pub fn to_xi(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.to_xi.matvec(theta)?)
    }

    pub fn to_theta(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.to_theta.matvec(xi)?)
    }

    pub fn forward_matrix(&self) -> &DenseMatrix {
        &self.to_xi
    }
}

impl QuadraticProblem {
    /// Validates symmetry (within 1e-12) and positive definiteness.
    pub fn new(q: DenseMatrix) -> Result<Self> {
        if !q.is_square() {
            return Err(dimension_error(
                "QuadraticProblem::new",
                format!("matrix is {}x{}", q.rows(), q.cols()),
            ));
        }
        let asym = q.max_asymmetry();
        if asym > 1e-12 {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        let eig = jacobi_eig(&q)?;
        let min_eig = *eig.eigenvalues.last().expect("non-empty");
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { q, eig })
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    /// `(loss, gradient)` at `theta`: loss is `theta' Q theta / 2`, gradient
    /// is `Q theta`.
    pub fn loss_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let grad = self.q.matvec(theta)?;
        let loss = 0.5 * theta.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
        Ok((loss, grad))
    }

    /// Change of variables in which the objective becomes `|xi|^2 / 2`:
    /// returns the identity-Hessian problem together with the maps.
    pub fn reparameterize(&self) -> Result<(QuadraticProblem, Reparameterization)> {
        let n = self.dim();
        let v = &self.eig.eigenvectors;
        let sqrt_l: Vec<f64> = self.eig.eigenvalues.iter().map(|&x| x.sqrt()).collect();
        // to_xi = Lambda^{1/2} V', to_theta = V Lambda^{-1/2}.
        let mut to_xi = v.transpose();
        for i in 0..n {
            for j in 0..n {
                to_xi.set(i, j, to_xi.get(i, j) * sqrt_l[i]);
            }
        }
        let mut to_theta = v.clone();
        for i in 0..n {
            for j in 0..n {
                to_theta.set(i, j, to_theta.get(i, j) / sqrt_l[j]);
            }
        }
        let identity_problem = QuadraticProblem::new(DenseMatrix::identity(n))?;
        Ok((identity_problem, Reparameterization { to_xi, to_theta }))
    }

    /// The start from which exact-line-search gradient descent attains its
    /// worst-case contraction rate: eigencoordinates proportional to the
    /// reciprocal eigenvalues.
    pub fn worst_start(&self) -> Vec<f64> {
        let n = self.dim();
        let v = &self.eig.eigenvectors;
        let mut theta = vec![0.0; n];
        for (k, &lam) in self.eig.eigenvalues.iter().enumerate() {
            let c = 1.0 / lam;
            for i in 0..n {
                theta[i] += c * v.get(i, k);
            }
        }
        theta
    }
}
