//! Built-in release gate: oracle-equivalence suites at fixed seeds, sized to
//! finish in seconds. Each suite reports pass/fail independently; the
//! command exits nonzero if any fails.

use bma_core::{best_fit, expand_full, frobenius_error, BmaMatrix, ErrorMode, Partition};
use models::{LogisticRegressionProblem, MlpModel, QuadraticProblem};
use optim::AdaGradBmaState;
use smalldense::{clamped_matrix_power, dense_inverse, DenseMatrix};

/// Only for the negative-control mode: which deliberate fault to inject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of the block correction before the dense comparison.
    ComputeDSign,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
    pub elapsed: std::time::Duration,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            if s.passed {
                out.push_str(&format!("[ok]   {}\n", s.name));
            } else {
                out.push_str(&format!("[FAIL] {}: {}\n", s.name, s.detail));
            }
        }
        out.push_str(&format!(
            "selftest: {} of {} suites passed in {:.2}s\n",
            self.suites.iter().filter(|s| s.passed).count(),
            self.suites.len(),
            self.elapsed.as_secs_f64()
        ));
        out
    }
}

pub fn run_selftest(fault: Option<Fault>) -> SelftestReport {
    let started = std::time::Instant::now();
    let suites = vec![
        run_suite("thm1_inverse_dense_oracle", suite_inverse),
        run_suite("thm2_inv_sqrt_dense_oracle", suite_inv_sqrt),
        run_suite("lemma1_sqrt_reconstruction", suite_sqrt),
        run_suite("prop1_best_fit", suite_best_fit),
        run_suite("alg1_compute_d_thm2_oracle", move || suite_compute_d(fault)),
        run_suite("alg1_step_dense_assembly", suite_bma_step),
        run_suite("gradient_finite_differences", suite_gradients),
        run_suite("line_search_rate", suite_line_search),
    ];
    SelftestReport {
        suites,
        elapsed: started.elapsed(),
    }
}

fn run_suite(name: &'static str, body: impl Fn() -> Result<(), String>) -> SuiteResult {
    match body() {
        Ok(()) => SuiteResult {
            name,
            passed: true,
            detail: String::new(),
        },
        Err(detail) => SuiteResult {
            name,
            passed: false,
            detail,
        },
    }
}

// Small deterministic generator kept local so the selftest binary does not
// depend on the dev-only oracle crate.
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn uniform_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_f64()).collect()
    }
}

fn random_pd_bma(rng: &mut Lcg, d: usize, sizes: Vec<usize>) -> Result<BmaMatrix, String> {
    let p = Partition::new(sizes).map_err(|e| e.to_string())?;
    let mut a = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a.set(i, j, rng.next_f64());
        }
    }
    let mut spd = a.matmul(&a.transpose()).map_err(|e| e.to_string())?;
    for i in 0..d {
        spd.set(i, i, spd.get(i, i) + d as f64);
    }
    best_fit(&spd, &p).map_err(|e| e.to_string())
}

fn suite_inverse() -> Result<(), String> {
    let mut rng = Lcg(11);
    for (d, sizes) in [
        (12, vec![4, 8]),
        (30, vec![10, 5, 15]),
        (48, vec![12, 12, 12, 12]),
    ] {
        let m = random_pd_bma(&mut rng, d, sizes)?;
        let inv = m.inverse().map_err(|e| e.to_string())?;
        let dense = m.expand();
        let reference = dense_inverse(&dense).map_err(|e| e.to_string())?;
        let got = inv.expand();
        let rel = got
            .sub(&reference)
            .map_err(|e| e.to_string())?
            .frobenius_norm()
            / reference.frobenius_norm();
        if rel > 1e-10 {
            return Err(format!("d={d}: relative error {rel:e} above 1e-10"));
        }
        let ident = got.matmul(&dense).map_err(|e| e.to_string())?;
        let dev = ident
            .max_abs_diff(&DenseMatrix::identity(d))
            .map_err(|e| e.to_string())?;
        if dev > 1e-9 {
            return Err(format!("d={d}: product deviates from identity by {dev:e}"));
        }
    }
    Ok(())
}

fn suite_inv_sqrt() -> Result<(), String> {
    let mut rng = Lcg(13);
    for (d, sizes) in [(10, vec![5, 5]), (24, vec![8, 10, 6])] {
        let m = random_pd_bma(&mut rng, d, sizes)?;
        let r = m.inv_sqrt().map_err(|e| e.to_string())?;
        let dense = clamped_matrix_power(&m.expand(), -0.5, 1e-300).map_err(|e| e.to_string())?;
        let rel = r
            .expand()
            .sub(&dense)
            .map_err(|e| e.to_string())?
            .frobenius_norm()
            / dense.frobenius_norm();
        if rel > 1e-10 {
            return Err(format!("d={d}: relative error {rel:e} above 1e-10"));
        }
    }
    Ok(())
}

fn suite_sqrt() -> Result<(), String> {
    let mut rng = Lcg(17);
    let m = random_pd_bma(&mut rng, 20, vec![6, 14])?;
    let root = m.sqrt().map_err(|e| e.to_string())?;
    let squared = root
        .expand()
        .matmul(&root.expand())
        .map_err(|e| e.to_string())?;
    let rel = squared
        .sub(&m.expand())
        .map_err(|e| e.to_string())?
        .frobenius_norm()
        / m.expand().frobenius_norm();
    if rel > 1e-9 {
        return Err(format!("square of root deviates by {rel:e}"));
    }
    Ok(())
}

fn suite_best_fit() -> Result<(), String> {
    let mut rng = Lcg(19);
    // Singleton losslessness.
    let d = 8;
    let mut m = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, rng.next_f64());
        }
    }
    let singles = Partition::singletons(d).map_err(|e| e.to_string())?;
    let fit = best_fit(&m, &singles).map_err(|e| e.to_string())?;
    let err = frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).map_err(|e| e.to_string())?;
    if err != 0.0 {
        return Err(format!("singleton fit error {err:e}, expected exactly 0"));
    }
    // Fixed point.
    let p = Partition::new(vec![3, 5]).map_err(|e| e.to_string())?;
    let lambda = vec![1.25, -0.5];
    let b = DenseMatrix::from_rows(&[[0.25, -0.1], [0.3, 0.05]]).map_err(|e| e.to_string())?;
    let m0 = BmaMatrix::new(p.clone(), lambda, b).map_err(|e| e.to_string())?;
    let refit = best_fit(&m0.expand(), &p).map_err(|e| e.to_string())?;
    if refit.lambda() != m0.lambda() || refit.b() != m0.b() {
        return Err("fixed-point recovery was not exact".into());
    }
    // Local optimality spot checks.
    let base = frobenius_error(
        &m,
        &best_fit(&m, &p).map_err(|e| e.to_string())?,
        ErrorMode::SquaredFrobenius,
    )
    .map_err(|e| e.to_string())?;
    let fit8 = best_fit(&m, &p).map_err(|e| e.to_string())?;
    for delta in [1e-3, 1e-1] {
        let mut lam = fit8.lambda().to_vec();
        lam[0] += delta;
        let perturbed =
            BmaMatrix::new(p.clone(), lam, fit8.b().clone()).map_err(|e| e.to_string())?;
        let err = frobenius_error(&m, &perturbed, ErrorMode::SquaredFrobenius)
            .map_err(|e| e.to_string())?;
        if err < base - 1e-12 {
            return Err(format!("perturbation by {delta} decreased the error"));
        }
    }
    Ok(())
}

fn suite_compute_d(fault: Option<Fault>) -> Result<(), String> {
    let p = Partition::new(vec![3, 5]).map_err(|e| e.to_string())?;
    let d = p.dim();
    let mut state = AdaGradBmaState::new(p.clone(), 0.1, 1e-8, 1e-7, 1);
    let mut theta = vec![0.0; d];
    let mut rng = Lcg(23);
    for _ in 0..6 {
        let g = rng.uniform_vec(d);
        state.step(&mut theta, &g).map_err(|e| e.to_string())?;
    }
    let mut d_mat = state.compute_d().map_err(|e| e.to_string())?;
    if fault == Some(Fault::ComputeDSign) {
        d_mat.scale_in_place(-1.0);
    }
    let lhs = expand_full(&d_mat, &p)
        .map_err(|e| e.to_string())?
        .add(&DenseMatrix::identity(d))
        .map_err(|e| e.to_string())?;

    // Dense route through the represented correction matrix.
    let z: Vec<f64> = state.r().iter().map(|&r| (r + 1e-8).sqrt()).collect();
    let v: Vec<f64> = (0..2).map(|i| z[p.range(i)].iter().sum()).collect();
    let mut b = DenseMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            if i != j {
                let scale = ((p.sizes()[i] * p.sizes()[j]) as f64).sqrt();
                b.set(i, j, state.u_outer().get(i, j) / (v[i] * v[j]) / scale);
            }
        }
    }
    let f = expand_full(&b, &p)
        .map_err(|e| e.to_string())?
        .add(&DenseMatrix::identity(d))
        .map_err(|e| e.to_string())?;
    let rhs = clamped_matrix_power(&f, -0.5, 1e-7).map_err(|e| e.to_string())?;
    let rel = lhs.sub(&rhs).map_err(|e| e.to_string())?.frobenius_norm() / rhs.frobenius_norm();
    if rel > 1e-9 {
        return Err(format!(
            "block correction deviates from dense route by {rel:e}"
        ));
    }
    Ok(())
}

fn suite_bma_step() -> Result<(), String> {
    let p = Partition::new(vec![4, 6]).map_err(|e| e.to_string())?;
    let d = p.dim();
    let eta = 0.2;
    let eps = 1e-8;
    let floor = 1e-7;
    let mut state = AdaGradBmaState::new(p.clone(), eta, eps, floor, 1);
    let mut theta = vec![0.0; d];

    let mut rng = Lcg(29);
    let mut oracle_theta = vec![0.0; d];
    let mut oracle_r = vec![0.0; d];
    let mut oracle_u = DenseMatrix::zeros(2, 2);

    for step in 0..10 {
        let g = rng.uniform_vec(d);
        state.step(&mut theta, &g).map_err(|e| e.to_string())?;

        for (r, &gi) in oracle_r.iter_mut().zip(&g) {
            *r += gi * gi;
        }
        let z: Vec<f64> = oracle_r.iter().map(|&r| (r + eps).sqrt()).collect();
        let u: Vec<f64> = (0..2).map(|i| g[p.range(i)].iter().sum()).collect();
        let v: Vec<f64> = (0..2).map(|i| z[p.range(i)].iter().sum()).collect();
        for i in 0..2 {
            for j in 0..2 {
                oracle_u.set(i, j, oracle_u.get(i, j) + u[i] * u[j]);
            }
        }
        let mut b = DenseMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                if i != j {
                    let scale = ((p.sizes()[i] * p.sizes()[j]) as f64).sqrt();
                    b.set(i, j, oracle_u.get(i, j) / (v[i] * v[j]) / scale);
                }
            }
        }
        let f = expand_full(&b, &p)
            .map_err(|e| e.to_string())?
            .add(&DenseMatrix::identity(d))
            .map_err(|e| e.to_string())?;
        let f_m12 = clamped_matrix_power(&f, -0.5, floor).map_err(|e| e.to_string())?;
        let d_bar = f_m12
            .sub(&DenseMatrix::identity(d))
            .map_err(|e| e.to_string())?;
        let z_m12: Vec<f64> = z.iter().map(|&x| 1.0 / x.sqrt()).collect();
        let half: Vec<f64> = g.iter().zip(&z_m12).map(|(gi, s)| gi * s).collect();
        let coupled = d_bar.matvec(&g).map_err(|e| e.to_string())?;
        for i in 0..d {
            oracle_theta[i] -= eta * z_m12[i] * (half[i] + coupled[i]);
        }

        let dev = theta
            .iter()
            .zip(&oracle_theta)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if dev > 1e-10 {
            return Err(format!("step {step}: deviation {dev:e} above 1e-10"));
        }
    }
    Ok(())
}

fn suite_gradients() -> Result<(), String> {
    let mut rng = Lcg(31);
    let fd = |f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64| -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            let orig = probe[i];
            probe[i] = orig + h;
            let plus = f(&probe);
            probe[i] = orig - h;
            let minus = f(&probe);
            probe[i] = orig;
            out.push((plus - minus) / (2.0 * h));
        }
        out
    };

    let q = {
        let mut a = DenseMatrix::zeros(5, 5);
        for i in 0..5 {
            for j in 0..5 {
                a.set(i, j, rng.next_f64());
            }
        }
        let mut spd = a.matmul(&a.transpose()).map_err(|e| e.to_string())?;
        for i in 0..5 {
            spd.set(i, i, spd.get(i, i) + 5.0);
        }
        QuadraticProblem::new(spd).map_err(|e| e.to_string())?
    };
    let theta = rng.uniform_vec(5);
    let (_, grad) = q.loss_grad(&theta).map_err(|e| e.to_string())?;
    let numeric = fd(&|t| q.loss_grad(t).unwrap().0, &theta, 1e-6);
    for (g, f) in grad.iter().zip(&numeric) {
        if (g - f).abs() > 1e-6 {
            return Err(format!("quadratic gradient {g} vs finite difference {f}"));
        }
    }

    let features = rng.uniform_vec(8 * 3);
    let labels: Vec<u8> = (0..8).map(|i| (i % 2) as u8).collect();
    let lp =
        LogisticRegressionProblem::new(features, labels, 3, 0.05).map_err(|e| e.to_string())?;
    let batch: Vec<usize> = (0..8).collect();
    let theta = rng.uniform_vec(4);
    let (_, grad) = lp.loss_grad(&theta, &batch).map_err(|e| e.to_string())?;
    let numeric = fd(&|t| lp.loss_grad(t, &batch).unwrap().0, &theta, 1e-6);
    for (g, f) in grad.iter().zip(&numeric) {
        if (g - f).abs() > 1e-6 * g.abs().max(1.0) {
            return Err(format!("logistic gradient {g} vs finite difference {f}"));
        }
    }

    let model = MlpModel::new(vec![4, 5, 3]).map_err(|e| e.to_string())?;
    let theta = model.init_params(3);
    let x = rng.uniform_vec(8);
    let labels = [0usize, 2];
    let (_, grad) = model
        .loss_grad(&theta, &x, &labels)
        .map_err(|e| e.to_string())?;
    let numeric = fd(
        &|t| model.loss_grad(t, &x, &labels).unwrap().0,
        &theta,
        1e-5,
    );
    for (i, (g, f)) in grad.iter().zip(&numeric).enumerate() {
        if (g - f).abs() > 1e-7_f64.max(1e-5 * g.abs()) {
            return Err(format!("network gradient coordinate {i}: {g} vs {f}"));
        }
    }
    Ok(())
}

fn suite_line_search() -> Result<(), String> {
    let q = DenseMatrix::from_rows(&[[1.0, -0.8], [-0.8, 1.0]]).map_err(|e| e.to_string())?;
    let problem = QuadraticProblem::new(q.clone()).map_err(|e| e.to_string())?;
    let mut theta = problem.worst_start();
    let mut losses = vec![problem.loss_grad(&theta).map_err(|e| e.to_string())?.0];
    for _ in 0..20 {
        optim::gd_exact_line_search_step(&mut theta, &q).map_err(|e| e.to_string())?;
        losses.push(problem.loss_grad(&theta).map_err(|e| e.to_string())?.0);
    }
    for w in losses[2..].windows(2) {
        let ratio = w[1] / w[0];
        if (ratio - 0.64).abs() > 0.01 {
            return Err(format!("per-step ratio {ratio} deviates from 0.64"));
        }
    }
    Ok(())
}
