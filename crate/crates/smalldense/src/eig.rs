use crate::{dimension_error, DenseMatrix, Error, Result};

/// Eigendecomposition of a symmetric matrix: `A = V diag(eigenvalues) Vᵀ`.
///
/// Eigenvalues are sorted descending; column `k` of `eigenvectors` pairs with
/// `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

const MAX_SWEEPS: usize = 100;
const OFF_DIAG_TOL: f64 = 1e-12;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(A + Aᵀ)/2` on entry, which tolerates
/// round-off accumulated by callers that build symmetric matrices
/// incrementally. Rotations sweep the strict upper triangle until the largest
/// off-diagonal magnitude falls below `1e-12 * ‖A‖_F`.
pub fn jacobi_eig(a: &DenseMatrix) -> Result<SymEig> {
    if !a.is_square() {
        return Err(dimension_error(
            "jacobi_eig",
            format!("matrix is {}x{}, expected square", a.rows(), a.cols()),
        ));
    }
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let threshold = OFF_DIAG_TOL * m.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off_max = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_max = off_max.max(m.get(p, q).abs());
            }
        }
        if off_max <= threshold {
            return Ok(sorted_eig(&m, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    // A last check: the final sweep may have converged.
    let mut off_max = 0.0_f64;
    for p in 0..n {
        for q in (p + 1)..n {
            off_max = off_max.max(m.get(p, q).abs());
        }
    }
    if off_max <= threshold {
        return Ok(sorted_eig(&m, v));
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// One Jacobi rotation annihilating `m[p][q]`, accumulated into `v`.
fn rotate(m: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.rows();
    m.set(p, p, app - t * apq);
    m.set(q, q, aqq + t * apq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        m.set(k, p, new_p);
        m.set(p, k, new_p);
        m.set(k, q, new_q);
        m.set(q, k, new_q);
    }
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

fn sorted_eig(m: &DenseMatrix, v: DenseMatrix) -> SymEig {
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m.get(b, b).partial_cmp(&m.get(a, a)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m.get(k, k)).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors.set(row, new_col, v.get(row, old_col));
        }
    }
    SymEig {
        eigenvalues,
        eigenvectors,
    }
}

/// `R diag(max(v, floor)^exponent) Rᵀ` from the eigendecomposition of a
/// symmetric `A`.
///
/// Clamping every eigenvalue at `floor > 0` before applying the power keeps
/// negative powers defined even when `A` is only positive semidefinite up to
/// round-off.
pub fn clamped_matrix_power(a: &DenseMatrix, exponent: f64, floor: f64) -> Result<DenseMatrix> {
    let eig = jacobi_eig(a)?;
    let n = a.rows();
    let powered: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&v| v.max(floor).powf(exponent))
        .collect();
    let r = &eig.eigenvectors;
    let mut out = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let w = powered[k];
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let rik = r.get(i, k) * w;
            if rik == 0.0 {
                continue;
            }
            for j in 0..n {
                let cur = out.get(i, j);
                out.set(i, j, cur + rik * r.get(j, k));
            }
        }
    }
    Ok(out)
}
