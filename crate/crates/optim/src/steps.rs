use smalldense::{dense_inverse, DenseMatrix};

use crate::{check_len, Result};

/// Plain gradient descent update `theta -= eta * grad`.
pub fn gd_step(theta: &mut [f64], grad: &[f64], eta: f64) -> Result<()> {
    check_len("gd_step", theta.len(), grad.len())?;
    for (t, g) in theta.iter_mut().zip(grad) {
        *t -= eta * g;
    }
    Ok(())
}

/// Exact line search step for the quadratic objective `f = theta' Q theta / 2`:
/// the step size `alpha = (g'g)/(g'Qg)` minimizes `f` along the gradient
/// `g = Q theta`. A zero gradient leaves `theta` unchanged. Returns the step
/// size taken.
pub fn gd_exact_line_search_step(theta: &mut [f64], q: &DenseMatrix) -> Result<f64> {
    let g = q.matvec(theta)?;
    let gg: f64 = g.iter().map(|x| x * x).sum();
    if gg == 0.0 {
        return Ok(0.0);
    }
    let qg = q.matvec(&g)?;
    let gqg: f64 = g.iter().zip(&qg).map(|(a, b)| a * b).sum();
    let alpha = gg / gqg;
    for (t, gi) in theta.iter_mut().zip(&g) {
        *t -= alpha * gi;
    }
    Ok(alpha)
}

/// Damped Newton update `theta -= eta * H^{-1} g`.
pub fn newton_step(theta: &mut [f64], grad: &[f64], hessian: &DenseMatrix, eta: f64) -> Result<()> {
    check_len("newton_step", theta.len(), grad.len())?;
    let inv = dense_inverse(hessian)?;
    let direction = inv.matvec(grad)?;
    for (t, d) in theta.iter_mut().zip(&direction) {
        *t -= eta * d;
    }
    Ok(())
}
