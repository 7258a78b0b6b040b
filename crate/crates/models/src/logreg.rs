use crate::{dimension_error, Error, Result};

/// Binary logistic regression: mean cross-entropy over a batch plus an L2
/// penalty on the weights (never the bias). Parameters are `[w..., bias]`,
/// or just the weights when the bias is disabled.
#[derive(Debug, Clone)]
pub struct LogisticRegressionProblem {
    features: Vec<f64>, // n x p, row-major
    labels: Vec<u8>,
    n: usize,
    p: usize,
    l2: f64,
    bias: bool,
}

impl LogisticRegressionProblem {
    pub fn new(features: Vec<f64>, labels: Vec<u8>, p: usize, l2: f64) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        if features.len() != n * p {
            return Err(dimension_error(
                "LogisticRegressionProblem::new",
                format!(
                    "{n} samples x {p} features needs {} values, got {}",
                    n * p,
                    features.len()
                ),
            ));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
        }
        Ok(Self {
            features,
            labels,
            n,
            p,
            l2,
            bias: true,
        })
    }

    pub fn without_bias(mut self) -> Self {
        self.bias = false;
        self
    }

    pub fn num_samples(&self) -> usize {
        self.n
    }

    /// Parameter count: `p + 1` with bias, `p` without.
    pub fn dim(&self) -> usize {
        self.p + usize::from(self.bias)
    }

    fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    /// Mean cross-entropy and analytic gradient over `batch` (sample
    /// indices). Errors on an empty batch.
    pub fn loss_grad(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        if theta.len() != self.dim() {
            return Err(dimension_error(
                "logreg_loss_grad",
                format!("theta has {} entries, expected {}", theta.len(), self.dim()),
            ));
        }
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let (w, b) = if self.bias {
            (&theta[..self.p], theta[self.p])
        } else {
            (theta, 0.0)
        };
        let mut loss = 0.0;
        let mut grad = vec![0.0; theta.len()];
        let inv = 1.0 / batch.len() as f64;
        for &i in batch {
            let x = self.sample(i);
            let y = f64::from(self.labels[i]);
            let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            // Stable cross-entropy: max(z,0) - z*y + ln(1 + exp(-|z|)).
            loss += inv * (z.max(0.0) - z * y + (-z.abs()).exp().ln_1p());
            let residual = inv * (sigmoid(z) - y);
            for (g, xi) in grad[..self.p].iter_mut().zip(x) {
                *g += residual * xi;
            }
            if self.bias {
                grad[self.p] += residual;
            }
        }
        if self.l2 > 0.0 {
            for (g, wi) in grad[..self.p].iter_mut().zip(w) {
                *g += self.l2 * wi;
            }
            loss += 0.5 * self.l2 * w.iter().map(|wi| wi * wi).sum::<f64>();
        }
        Ok((loss, grad))
    }

    /// Fraction of `batch` classified correctly at threshold 1/2.
    pub fn accuracy(&self, theta: &[f64], batch: &[usize]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let (w, b) = if self.bias {
            (&theta[..self.p], theta[self.p])
        } else {
            (theta, 0.0)
        };
        let mut hits = 0usize;
        for &i in batch {
            let x = self.sample(i);
            let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let predicted = u8::from(z > 0.0);
            if predicted == self.labels[i] {
                hits += 1;
            }
        }
        Ok(hits as f64 / batch.len() as f64)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_on_balanced_labels_give_ln_two() {
        let problem =
            LogisticRegressionProblem::new(vec![1.0, -1.0, 2.0, 0.5], vec![0, 1], 2, 0.0).unwrap();
        let (loss, _) = problem.loss_grad(&[0.0, 0.0, 0.0], &[0, 1]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn separable_data_saturates_to_regularizer() {
        // 1-D separable points; a large correctly signed weight drives the
        // cross-entropy to zero, leaving only the L2 term.
        let l2 = 0.01;
        let problem =
            LogisticRegressionProblem::new(vec![1.0, 2.0, -1.0, -2.0], vec![1, 1, 0, 0], 1, l2)
                .unwrap();
        let theta = vec![50.0, 0.0];
        let (loss, _) = problem.loss_grad(&theta, &[0, 1, 2, 3]).unwrap();
        let l2_term = 0.5 * l2 * 50.0 * 50.0;
        assert!(
            (loss - l2_term).abs() < 1e-12,
            "loss {loss} vs l2 {l2_term}"
        );
        assert_eq!(problem.accuracy(&theta, &[0, 1, 2, 3]).unwrap(), 1.0);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let problem = LogisticRegressionProblem::new(vec![1.0], vec![1], 1, 0.0).unwrap();
        assert!(matches!(
            problem.loss_grad(&[0.0, 0.0], &[]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bias_toggle_changes_dimension() {
        let problem = LogisticRegressionProblem::new(vec![1.0, 2.0], vec![0, 1], 1, 0.0).unwrap();
        assert_eq!(problem.dim(), 2);
        assert_eq!(problem.without_bias().dim(), 1);
    }
}
