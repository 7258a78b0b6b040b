use crate::{dimension_error, DenseMatrix, Error, Result};

const PIVOT_FLOOR: f64 = 1e-300;

/// Matrix inverse by Gauss-Jordan elimination with partial pivoting.
pub fn dense_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(dimension_error(
            "dense_inverse",
            format!("matrix is {}x{}, expected square", a.rows(), a.cols()),
        ));
    }
    let n = a.rows();
    // Augmented system [A | I], eliminated in place.
    let mut work = a.clone();
    let mut inv = DenseMatrix::identity(n);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = work.get(col, col).abs();
        for r in (col + 1)..n {
            let cand = work.get(r, col).abs();
            if cand > pivot {
                pivot = cand;
                pivot_row = r;
            }
        }
        if pivot < PIVOT_FLOOR {
            return Err(Error::Singular {
                pivot: work.get(pivot_row, col),
                index: col,
            });
        }
        if pivot_row != col {
            swap_rows(&mut work, col, pivot_row);
            swap_rows(&mut inv, col, pivot_row);
        }
        let scale = 1.0 / work.get(col, col);
        scale_row(&mut work, col, scale);
        scale_row(&mut inv, col, scale);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work.get(r, col);
            if factor == 0.0 {
                continue;
            }
            axpy_row(&mut work, r, col, -factor);
            axpy_row(&mut inv, r, col, -factor);
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut DenseMatrix, a: usize, b: usize) {
    for j in 0..m.cols() {
        let t = m.get(a, j);
        m.set(a, j, m.get(b, j));
        m.set(b, j, t);
    }
}

fn scale_row(m: &mut DenseMatrix, row: usize, alpha: f64) {
    for j in 0..m.cols() {
        m.set(row, j, m.get(row, j) * alpha);
    }
}

/// `row_dst += alpha * row_src`.
fn axpy_row(m: &mut DenseMatrix, dst: usize, src: usize, alpha: f64) {
    for j in 0..m.cols() {
        let v = m.get(dst, j) + alpha * m.get(src, j);
        m.set(dst, j, v);
    }
}
