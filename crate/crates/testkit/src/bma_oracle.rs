//! Dense reference for the block-mean AdaGrad update. Rebuilds the
//! preconditioner every step from scratch with expansion matrices and a
//! full-dimension eigendecomposition; shares no code with the `O(L^3 + d)`
//! path it checks.

use bma_core::{expand_full, Partition};
use smalldense::{clamped_matrix_power, DenseMatrix};

pub struct DenseBmaOracle {
    partition: Partition,
    r: Vec<f64>,
    u_outer: DenseMatrix,
    pub theta: Vec<f64>,
    eta: f64,
    eps: f64,
    eig_floor: f64,
    scaled_u: bool,
}

impl DenseBmaOracle {
    pub fn new(partition: Partition, eta: f64, eps: f64, eig_floor: f64, scaled_u: bool) -> Self {
        let d = partition.dim();
        let l = partition.block_count();
        Self {
            partition,
            r: vec![0.0; d],
            u_outer: DenseMatrix::zeros(l, l),
            theta: vec![0.0; d],
            eta,
            eps,
            eig_floor,
            scaled_u,
        }
    }

    pub fn step(&mut self, g: &[f64]) {
        let p = &self.partition;
        let l = p.block_count();
        let d = p.dim();
        for (r, &gi) in self.r.iter_mut().zip(g) {
            *r += gi * gi;
        }
        let z: Vec<f64> = self.r.iter().map(|&r| (r + self.eps).sqrt()).collect();
        let u: Vec<f64> = (0..l).map(|i| g[p.range(i)].iter().sum()).collect();
        let v: Vec<f64> = (0..l).map(|i| z[p.range(i)].iter().sum()).collect();
        for i in 0..l {
            for j in 0..l {
                self.u_outer.set(i, j, self.u_outer.get(i, j) + u[i] * u[j]);
            }
        }

        // Represented correction: B = S^{-1/2} [(U - diag U) / (v v')] S^{-1/2},
        // then the dense inverse square root of F = I + B-bar.
        let mut b = DenseMatrix::zeros(l, l);
        for i in 0..l {
            let si = (p.sizes()[i] as f64).sqrt();
            for j in 0..l {
                if i == j {
                    continue;
                }
                let sj = (p.sizes()[j] as f64).sqrt();
                b.set(i, j, self.u_outer.get(i, j) / (v[i] * v[j]) / (si * sj));
            }
        }
        let f = expand_full(&b, p)
            .expect("oracle shapes")
            .add(&DenseMatrix::identity(d))
            .expect("oracle shapes");
        let f_inv_sqrt = clamped_matrix_power(&f, -0.5, self.eig_floor).expect("oracle eig");

        let z_m12 = DenseMatrix::diagonal(&z.iter().map(|&x| 1.0 / x.sqrt()).collect::<Vec<_>>());
        let update = if self.scaled_u {
            // Symmetric split: Z^{-1/2} F^{-1/2} Z^{-1/2} g.
            let half = z_m12.matvec(g).expect("oracle shapes");
            let corrected = f_inv_sqrt.matvec(&half).expect("oracle shapes");
            z_m12.matvec(&corrected).expect("oracle shapes")
        } else {
            // Raw block sums: the correction sees the unscaled gradient.
            let d_bar = f_inv_sqrt
                .sub(&DenseMatrix::identity(d))
                .expect("oracle shapes");
            let half = z_m12.matvec(g).expect("oracle shapes");
            let coupled = d_bar.matvec(g).expect("oracle shapes");
            let summed: Vec<f64> = half.iter().zip(&coupled).map(|(a, b)| a + b).collect();
            z_m12.matvec(&summed).expect("oracle shapes")
        };
        for (t, upd) in self.theta.iter_mut().zip(&update) {
            *t -= self.eta * upd;
        }
    }
}
