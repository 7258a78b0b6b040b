//! Test oracles and seeded instance generators shared by the workspace test
//! suites. Everything here is deliberately independent of the production code
//! paths it is used to check: gradients come from central differences, the
//! eigensolver is a separately coded Householder + QL implementation, and the
//! block-mean fit oracle solves the least-squares normal equations over an
//! explicit basis.

mod alt_eig;
mod bma_oracle;
mod fit_oracle;

pub use alt_eig::alt_sym_eig;
pub use bma_oracle::DenseBmaOracle;
pub use fit_oracle::normal_equations_best_fit;

use bma_core::Partition;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smalldense::DenseMatrix;

/// Seeded deterministic RNG for tests.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn uniform_matrix(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
) -> DenseMatrix {
    let data = uniform_vec(rng, rows * cols, lo, hi);
    DenseMatrix::from_vec(rows, cols, data).expect("generator shape")
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-scale..scale);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

/// Well-conditioned random SPD matrix `A Aᵀ + n I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let a = uniform_matrix(rng, n, n, -1.0, 1.0);
    let mut spd = a.matmul(&a.transpose()).expect("square product");
    for i in 0..n {
        spd.set(i, i, spd.get(i, i) + n as f64);
    }
    spd
}

/// Random partition of `d` coordinates into at most `max_blocks` blocks.
pub fn random_partition(rng: &mut ChaCha8Rng, d: usize, max_blocks: usize) -> Partition {
    let blocks = rng.random_range(1..=max_blocks.min(d));
    // Random composition: choose blocks-1 distinct interior cut points.
    let mut cuts: Vec<usize> = Vec::with_capacity(blocks + 1);
    cuts.push(0);
    while cuts.len() < blocks {
        let c = rng.random_range(1..d);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.push(d);
    cuts.sort_unstable();
    let sizes: Vec<usize> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    Partition::new(sizes).expect("generator invariant")
}

/// Random symmetric positive definite block-mean matrix, built by fitting a
/// random SPD matrix on a random partition.
pub fn random_pd_bma(rng: &mut ChaCha8Rng, d: usize, max_blocks: usize) -> bma_core::BmaMatrix {
    let p = random_partition(rng, d, max_blocks);
    let m = random_spd(rng, d);
    bma_core::best_fit(&m, &p).expect("fit of square matrix")
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn fd_grad<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        grad.push((plus - minus) / (2.0 * h));
    }
    grad
}

/// `‖a − b‖_F / max(‖b‖_F, tiny)`.
pub fn rel_fro_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let diff = a.sub(b).expect("shape");
    diff.frobenius_norm() / b.frobenius_norm().max(1e-300)
}

pub fn max_abs_diff_slice(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (&x, &y)| m.max((x - y).abs()))
}

/// Gauss-Jordan solve used by the oracles; independent of the production
/// elimination code.
pub(crate) fn gauss_jordan_solve(a: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = a.rows();
    assert!(a.is_square() && rhs.len() == n);
    let mut m = a.clone();
    let mut x = rhs.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m.get(r, col).abs() > m.get(piv, col).abs() {
                piv = r;
            }
        }
        assert!(m.get(piv, col).abs() > 1e-300, "oracle system is singular");
        if piv != col {
            for j in 0..n {
                let t = m.get(col, j);
                m.set(col, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            x.swap(col, piv);
        }
        let scale = 1.0 / m.get(col, col);
        for j in 0..n {
            m.set(col, j, m.get(col, j) * scale);
        }
        x[col] *= scale;
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m.get(r, col);
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
            x[r] -= f * x[col];
        }
    }
    x
}
