//! Brute-force least-squares oracle for the optimal block-mean fit: assemble
//! the explicit basis of block-constant and block-scaled-identity matrices,
//! form the Gram system by entrywise inner products, and solve the normal
//! equations. Completely independent of the closed-form fit it checks.

use bma_core::Partition;
use smalldense::DenseMatrix;

/// Returns `(lambda, b, fitted)` minimizing the Frobenius distance between
/// `fitted` and `m` over the block-mean family on `p`, solved by normal
/// equations over an explicit basis. Diagonal singleton blocks keep
/// `b_ii = 0`, matching the convention of the closed-form fit.
pub fn normal_equations_best_fit(
    m: &DenseMatrix,
    p: &Partition,
) -> (Vec<f64>, DenseMatrix, DenseMatrix) {
    let d = p.dim();
    assert!(m.rows() == d && m.cols() == d, "oracle shape mismatch");
    let l = p.block_count();

    enum Basis {
        // Constant 1 on block (i, j); zero elsewhere.
        Ones(usize, usize),
        // Identity restricted to diagonal block i.
        Ident(usize),
    }

    let mut basis = Vec::new();
    for i in 0..l {
        for j in 0..l {
            if i == j && p.sizes()[i] == 1 {
                continue; // b_ii pinned to zero; lambda alone covers the entry
            }
            basis.push(Basis::Ones(i, j));
        }
    }
    for i in 0..l {
        basis.push(Basis::Ident(i));
    }

    let materialize = |b: &Basis| -> DenseMatrix {
        let mut out = DenseMatrix::zeros(d, d);
        match *b {
            Basis::Ones(i, j) => {
                for r in p.range(i) {
                    for c in p.range(j) {
                        out.set(r, c, 1.0);
                    }
                }
            }
            Basis::Ident(i) => {
                for r in p.range(i) {
                    out.set(r, r, 1.0);
                }
            }
        }
        out
    };
    let mats: Vec<DenseMatrix> = basis.iter().map(materialize).collect();

    let k = mats.len();
    let mut gram = DenseMatrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for a in 0..k {
        for b in a..k {
            let mut dot = 0.0;
            for (x, y) in mats[a].as_slice().iter().zip(mats[b].as_slice()) {
                dot += x * y;
            }
            gram.set(a, b, dot);
            gram.set(b, a, dot);
        }
        let mut dot = 0.0;
        for (x, y) in mats[a].as_slice().iter().zip(m.as_slice()) {
            dot += x * y;
        }
        rhs[a] = dot;
    }
    let coef = crate::gauss_jordan_solve(&gram, &rhs);

    let mut fitted = DenseMatrix::zeros(d, d);
    let mut lambda = vec![0.0; l];
    let mut b_out = DenseMatrix::zeros(l, l);
    for (idx, b) in basis.iter().enumerate() {
        match *b {
            Basis::Ones(i, j) => b_out.set(i, j, coef[idx]),
            Basis::Ident(i) => lambda[i] = coef[idx],
        }
        let mut scaled = mats[idx].clone();
        scaled.scale_in_place(coef[idx]);
        fitted.add_assign(&scaled).expect("shape");
    }
    (lambda, b_out, fitted)
}
