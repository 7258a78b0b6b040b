//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with its headline numbers (run with `--nocapture` to see them).

use std::time::Instant;

use bma_core::{best_fit, frobenius_error, BmaMatrix, ErrorMode, Partition};
use harness::config::parse_config_str;
use harness::{run_experiment, run_fisher_analysis, FisherConfig, FisherGranularity, RunConfig};
use models::{LogisticRegressionProblem, MlpModel, QuadraticProblem};
use optim::{gd_exact_line_search_step, newton_step, AdaGradBmaState, AdaGradDiagState};
use smalldense::{clamped_matrix_power, dense_inverse, DenseMatrix};

/// Instance family shared by the first two criteria: random symmetric
/// positive definite block-mean matrices with `d <= 200`, `L <= 10` and a
/// spectrum bounded well inside condition 1e6.
fn pd_instance(rng: &mut rand_chacha::ChaCha8Rng, index: usize) -> BmaMatrix {
    // Deterministic spread of dimensions over [10, 200].
    let d = 10 + (index * 29) % 191;
    testkit::random_pd_bma(rng, d, 10)
}

#[test]
fn criterion_01_inverse_oracle_suite() {
    let started = Instant::now();
    let mut rng = testkit::rng(20260808);
    let instances = 200;
    let mut worst_identity = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    for index in 0..instances {
        let m = pd_instance(&mut rng, index);
        let d = m.partition().dim();
        let inv = m.inverse().expect("positive definite instance");
        assert_eq!(inv.partition(), m.partition(), "closure violated");

        let dense = m.expand();
        let inv_dense = inv.expand();
        let ident = DenseMatrix::identity(d);
        let left = inv_dense
            .matmul(&dense)
            .unwrap()
            .max_abs_diff(&ident)
            .unwrap();
        let right = dense
            .matmul(&inv_dense)
            .unwrap()
            .max_abs_diff(&ident)
            .unwrap();
        worst_identity = worst_identity.max(left).max(right);
        assert!(
            left <= 1e-9 && right <= 1e-9,
            "instance {index} (d={d}): identity residual {left:e}/{right:e}"
        );

        let reference = dense_inverse(&dense).unwrap();
        let rel = testkit::rel_fro_diff(&inv_dense, &reference);
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-10,
            "instance {index} (d={d}): relative error {rel:e}"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "suite took {elapsed:?}, budget 30 s"
    );
    println!(
        "[PASS] criterion 1: inverse matches elimination on {instances} instances \
         (worst identity residual {worst_identity:.2e}, worst relative {worst_rel:.2e}, {elapsed:?})"
    );
}

#[test]
fn criterion_02_root_oracle_suite() {
    let mut rng = testkit::rng(499);
    let instances = 200;
    let mut worst_rel = 0.0_f64;
    let mut worst_sq = 0.0_f64;
    for index in 0..instances {
        let m = pd_instance(&mut rng, index);
        let d = m.partition().dim();

        let isqrt = m.inv_sqrt().expect("positive definite instance");
        // Dense route with the clamp floor far below the spectrum: a plain
        // eigendecomposition inverse square root.
        let reference = clamped_matrix_power(&m.expand(), -0.5, 1e-300).unwrap();
        let rel = testkit::rel_fro_diff(&isqrt.expand(), &reference);
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-10,
            "instance {index} (d={d}): inverse root deviates {rel:e}"
        );

        let root = m.sqrt().expect("positive definite instance");
        let squared = root.expand().matmul(&root.expand()).unwrap();
        let sq = testkit::rel_fro_diff(&squared, &m.expand());
        worst_sq = worst_sq.max(sq);
        assert!(
            sq <= 1e-9,
            "instance {index} (d={d}): squared root deviates {sq:e}"
        );
    }
    println!(
        "[PASS] criterion 2: inverse square root matches dense eigendecomposition on {instances} \
         instances (worst relative {worst_rel:.2e}, worst reconstruction {worst_sq:.2e})"
    );
}

#[test]
fn criterion_03_optimal_fit_suite() {
    let mut rng = testkit::rng(733);

    // Singleton losslessness: exact, for any matrix.
    for _ in 0..20 {
        let d = 1 + (testkit::uniform_vec(&mut rng, 1, 0.0, 12.0)[0] as usize);
        let m = testkit::uniform_matrix(&mut rng, d, d, -4.0, 4.0);
        let p = Partition::singletons(d).unwrap();
        let fit = best_fit(&m, &p).unwrap();
        assert_eq!(
            fit.expand(),
            m,
            "singleton fit must reproduce the matrix exactly"
        );
        assert_eq!(
            frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).unwrap(),
            0.0
        );
    }

    // Fixed-point recovery: exact on in-family matrices.
    for _ in 0..20 {
        let p = testkit::random_partition(&mut rng, 18, 5);
        let l = p.block_count();
        let lambda = testkit::uniform_vec(&mut rng, l, -2.0, 2.0);
        let mut b = testkit::uniform_matrix(&mut rng, l, l, -2.0, 2.0);
        for i in 0..l {
            if p.sizes()[i] == 1 {
                b.set(i, i, 0.0);
            }
        }
        let m0 = BmaMatrix::new(p.clone(), lambda, b).unwrap();
        let fit = best_fit(&m0.expand(), &p).unwrap();
        assert_eq!(fit.lambda(), m0.lambda());
        assert_eq!(fit.b(), m0.b());
    }

    // Local optimality: no single-coordinate nudge reduces the error.
    let mut checked = 0usize;
    while checked < 50 {
        let d = 8 + checked % 5;
        let m = testkit::uniform_matrix(&mut rng, d, d, -3.0, 3.0);
        let p = testkit::random_partition(&mut rng, d, 4);
        let fit = best_fit(&m, &p).unwrap();
        let base = frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).unwrap();
        let l = p.block_count();
        for delta in [1e-3, 1e-1] {
            for sign in [-1.0, 1.0] {
                for i in 0..l {
                    let mut lambda = fit.lambda().to_vec();
                    lambda[i] += sign * delta;
                    let err = frobenius_error(
                        &m,
                        &BmaMatrix::new(p.clone(), lambda, fit.b().clone()).unwrap(),
                        ErrorMode::SquaredFrobenius,
                    )
                    .unwrap();
                    assert!(
                        err >= base - 1e-12,
                        "lambda[{i}] {sign}{delta}: {err} < {base}"
                    );
                    for j in 0..l {
                        let mut b = fit.b().clone();
                        b.set(i, j, b.get(i, j) + sign * delta);
                        let err = frobenius_error(
                            &m,
                            &BmaMatrix::new(p.clone(), fit.lambda().to_vec(), b).unwrap(),
                            ErrorMode::SquaredFrobenius,
                        )
                        .unwrap();
                        assert!(
                            err >= base - 1e-12,
                            "b[{i}][{j}] {sign}{delta}: {err} < {base}"
                        );
                    }
                }
            }
        }
        checked += 1;
    }
    println!("[PASS] criterion 3: optimal fit is lossless on singletons, an exact fixed point, and locally optimal on {checked} instances");
}

#[test]
fn criterion_04_line_search_rate_reproduction() {
    // End to end through the harness: the textbook coupled quadratic from
    // its worst start, exact line search, per-step ratios from the log.
    let partial = parse_config_str(
        "problem = quadratic\noptimizer = gd-ls\nlr = 1\nepochs = 40\nquad-dim = 2\ninit = worst\nseed = 7\n",
    )
    .unwrap();
    let mut config = partial.resolve().unwrap();
    let dir = tempfile::tempdir().unwrap();
    config.out = dir.path().to_path_buf();
    let summary = run_experiment(&config).unwrap();
    let records = &summary.cells[0].log.records;
    assert!(records.len() > 30);
    let mut worst_dev = 0.0_f64;
    for w in records.windows(2).skip(2) {
        let ratio = w[1].train_loss / w[0].train_loss;
        worst_dev = worst_dev.max((ratio - 0.64).abs());
        assert!((ratio - 0.64).abs() <= 0.01, "per-step ratio {ratio}");
    }

    // More than 20 steps to shrink the objective by 1e6 from the worst start.
    let f0 = records[0].train_loss;
    let steps_needed = records
        .iter()
        .position(|r| r.train_loss <= 1e-6 * f0)
        .expect("converges within the run");
    assert!(
        steps_needed > 20,
        "reached 1e-6 f0 in only {steps_needed} steps"
    );

    // The reparameterized problem needs exactly one step.
    let problem =
        QuadraticProblem::new(DenseMatrix::from_rows(&[[1.0, -0.8], [-0.8, 1.0]]).unwrap())
            .unwrap();
    let (identity_problem, map) = problem.reparameterize().unwrap();
    let mut xi = map.to_xi(&problem.worst_start()).unwrap();
    let before = identity_problem.loss_grad(&xi).unwrap().0;
    assert!(before > 1e-24);
    gd_exact_line_search_step(&mut xi, identity_problem.q()).unwrap();
    let after = identity_problem.loss_grad(&xi).unwrap().0;
    assert!(after <= 1e-24, "one step left the objective at {after:e}");

    println!(
        "[PASS] criterion 4: per-step ratio 0.64 +/- {worst_dev:.4}, {steps_needed} steps to 1e-6, \
         reparameterized objective {after:e} after one step"
    );
}

#[test]
fn criterion_05_newton_affine_invariance() {
    let mut rng = testkit::rng(808);
    let eta = 0.4;
    let mut worst = 0.0_f64;
    for trial in 0..20 {
        let n = 5;
        let q = testkit::random_spd(&mut rng, n);
        let mut a = testkit::uniform_matrix(&mut rng, n, n, -0.3, 0.3);
        for i in 0..n {
            a.set(i, i, a.get(i, i) + 1.0);
        }
        let pulled_back = a.transpose().matmul(&q).unwrap().matmul(&a).unwrap();
        let theta0 = testkit::uniform_vec(&mut rng, n, -1.0, 1.0);
        let mut theta = theta0.clone();
        let mut xi = a.matvec(&theta0).unwrap();
        for step in 0..5 {
            let grad_theta = pulled_back.matvec(&theta).unwrap();
            newton_step(&mut theta, &grad_theta, &pulled_back, eta).unwrap();
            let grad_xi = q.matvec(&xi).unwrap();
            newton_step(&mut xi, &grad_xi, &q, eta).unwrap();
            let mapped = a.matvec(&theta).unwrap();
            let dev = testkit::max_abs_diff_slice(&mapped, &xi);
            worst = worst.max(dev);
            assert!(dev <= 1e-10, "map {trial} step {step}: deviation {dev:e}");
        }
    }
    println!("[PASS] criterion 5: Newton trajectories map through 20 affine changes of variables (max deviation {worst:.2e})");
}

#[test]
fn criterion_06_block_mean_adagrad_equivalence() {
    let eps = 1e-8;
    let floor = 1e-7;
    let mut worst_dense = 0.0_f64;
    for (case, sizes) in [vec![24], vec![20, 28], vec![10, 18, 6, 22, 8]]
        .iter()
        .enumerate()
    {
        let p = Partition::new(sizes.clone()).unwrap();
        let d = p.dim();
        assert!(d <= 64);
        let eta = 0.2;
        let mut rng = testkit::rng(8600 + case as u64);
        let mut state = AdaGradBmaState::new(p.clone(), eta, eps, floor, 1);
        let mut theta = vec![0.0; d];
        let mut oracle = testkit::DenseBmaOracle::new(p.clone(), eta, eps, floor, false);
        for step in 0..15 {
            let g = testkit::uniform_vec(&mut rng, d, -2.0, 2.0);
            state.step(&mut theta, &g).unwrap();
            oracle.step(&g);
            let dev = testkit::max_abs_diff_slice(&theta, &oracle.theta);
            worst_dense = worst_dense.max(dev);
            assert!(dev <= 1e-10, "case {case} step {step}: deviation {dev:e}");
        }
    }

    // Single-block runs collapse onto diagonal AdaGrad.
    let mut worst_diag = 0.0_f64;
    for d in [1usize, 16, 64] {
        let eta = 0.3;
        let mut rng = testkit::rng(d as u64);
        let mut bma = AdaGradBmaState::new(Partition::single_block(d).unwrap(), eta, eps, floor, 1);
        let mut diag = AdaGradDiagState::new(d, eta, eps);
        let mut theta_b = vec![0.0; d];
        let mut theta_d = vec![0.0; d];
        for step in 0..15 {
            let g = testkit::uniform_vec(&mut rng, d, -2.0, 2.0);
            bma.step(&mut theta_b, &g).unwrap();
            diag.step(&mut theta_d, &g).unwrap();
            let dev = testkit::max_abs_diff_slice(&theta_b, &theta_d);
            worst_diag = worst_diag.max(dev);
            assert!(dev <= 1e-14, "d={d} step {step}: deviation {dev:e}");
        }
    }
    println!(
        "[PASS] criterion 6: block-mean steps match the dense assembly oracle \
         (max {worst_dense:.2e}) and reduce to diagonal AdaGrad at one block (max {worst_diag:.2e})"
    );
}

fn quadratic_comparison_config(optimizer: &str, floor: f64, dir: &std::path::Path) -> RunConfig {
    let mut config = parse_config_str(&format!(
        "problem = quadratic\noptimizer = {optimizer}\nlr-grid = true\nepochs = 300\nseed = 7\n\
         quad-dim = 40\neig-floor = {floor}\n"
    ))
    .unwrap()
    .resolve()
    .unwrap();
    config.out = dir.join(optimizer);
    config
}

fn mlp_comparison_config(optimizer: &str, dir: &std::path::Path) -> RunConfig {
    let mut config = parse_config_str(&format!(
        "problem = mlp-synth\noptimizer = {optimizer}\nlr-grid = true\nepochs = 40\nseed = 7\n\
         batch = 64\nblob-spread = 0.5\nmlp-hidden = 12,10\npartition = unit\neig-floor = 0.25\n"
    ))
    .unwrap()
    .resolve()
    .unwrap();
    config.out = dir.join(optimizer);
    config
}

/// First step at which the log reaches `target`.
fn crossing_step(log: &data_io::TrainLog, target: f64) -> Option<u64> {
    log.records
        .iter()
        .find(|r| r.train_loss <= target)
        .map(|r| r.step)
}

#[test]
fn criterion_07_convergence_ordering() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    // (a) 40-dimensional quadratic with strong two-block cross-correlation.
    let diag = run_experiment(&quadratic_comparison_config(
        "adagrad-diag",
        0.01,
        dir.path(),
    ))
    .unwrap();
    let bma = run_experiment(&quadratic_comparison_config(
        "adagrad-bma",
        0.01,
        dir.path(),
    ))
    .unwrap();
    let full = run_experiment(&quadratic_comparison_config(
        "adagrad-full",
        0.01,
        dir.path(),
    ))
    .unwrap();

    let diag_best = diag.best_cell().expect("diag converges");
    let bma_best = bma.best_cell().expect("bma converges");
    let full_best = full.best_cell().expect("full converges");
    let diag_final = diag_best.final_loss.unwrap();
    let cross = crossing_step(&bma_best.log, diag_final)
        .expect("block-mean run must reach the diagonal final loss");
    assert!(
        cross < diag_best.steps,
        "quadratic: block-mean crossed at {cross}, diagonal used {} steps",
        diag_best.steps
    );
    assert!(
        full_best.final_loss.unwrap() <= bma_best.final_loss.unwrap(),
        "full {} should not trail block-mean {}",
        full_best.final_loss.unwrap(),
        bma_best.final_loss.unwrap()
    );
    let quad_cross = cross;
    let quad_steps = diag_best.steps;

    // (b) tanh network 16-12-10-3 on seeded blobs.
    let diag = run_experiment(&mlp_comparison_config("adagrad-diag", dir.path())).unwrap();
    let bma = run_experiment(&mlp_comparison_config("adagrad-bma", dir.path())).unwrap();
    let diag_best = diag.best_cell().expect("diag converges");
    let bma_best = bma.best_cell().expect("bma converges");
    let diag_final = diag_best.final_loss.unwrap();
    let cross = crossing_step(&bma_best.log, diag_final)
        .expect("block-mean run must reach the diagonal final loss");
    assert!(
        cross < diag_best.steps,
        "network: block-mean crossed at {cross}, diagonal used {} steps",
        diag_best.steps
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "criterion took {elapsed:?}, budget 5 min"
    );
    println!(
        "[PASS] criterion 7: quadratic crossing {quad_cross}/{quad_steps} steps, \
         network crossing {cross}/{} steps, full-matrix dominates ({elapsed:?})",
        diag_best.steps
    );
}

#[test]
fn criterion_08_fisher_partition_properties() {
    // Symmetry and positive semidefiniteness of the empirical Fisher.
    let model = MlpModel::new(vec![6, 5, 4]).unwrap();
    let theta = model.init_params(11);
    let mut rng = testkit::rng(2400);
    let n = 30;
    let inputs = testkit::uniform_vec(&mut rng, n * model.input_dim(), 0.0, 1.0);
    let labels: Vec<usize> = (0..n).map(|i| i % model.num_classes()).collect();
    let fisher = models::empirical_fisher(&model, &theta, &inputs, &labels, n).unwrap();
    assert_eq!(fisher.max_asymmetry(), 0.0);
    let min_eig = *smalldense::jacobi_eig(&fisher)
        .unwrap()
        .eigenvalues
        .last()
        .unwrap();
    assert!(min_eig >= -1e-9, "min eigenvalue {min_eig:e}");

    // Fit error ordering across granularities via the analysis pipeline.
    let dir = tempfile::tempdir().unwrap();
    let config = FisherConfig {
        steps: 15,
        granularities: vec![
            FisherGranularity::Layer,
            FisherGranularity::Unit,
            FisherGranularity::Singleton,
        ],
        out: dir.path().to_path_buf(),
        train_n: 200,
        max_samples: 200,
        mlp_hidden: vec![8, 6],
        ..FisherConfig::default()
    };
    let report = run_fisher_analysis(&config).unwrap();
    let mse: Vec<f64> = report.per_granularity.iter().map(|g| g.mse_raw).collect();
    assert_eq!(mse.len(), 3);
    assert!(
        mse[1] <= mse[0] + 1e-12,
        "unit {:.3e} above layer {:.3e}",
        mse[1],
        mse[0]
    );
    assert_eq!(mse[2], 0.0, "singleton fit must be exact");
    println!(
        "[PASS] criterion 8: Fisher symmetric with min eigenvalue {min_eig:.1e}, \
         fit error layer {:.3e} >= unit {:.3e} >= singleton 0",
        mse[0], mse[1]
    );
}

#[test]
fn criterion_09_gradient_integrity() {
    let mut rng = testkit::rng(9001);
    let mut checked = 0usize;

    let quadratic = QuadraticProblem::new(testkit::random_spd(&mut rng, 10)).unwrap();
    let features = testkit::uniform_vec(&mut rng, 24 * 6, -1.5, 1.5);
    let labels: Vec<u8> = (0..24).map(|i| (i % 2) as u8).collect();
    let logreg = LogisticRegressionProblem::new(features, labels, 6, 0.05).unwrap();
    let batch: Vec<usize> = (0..24).collect();
    let model = MlpModel::new(vec![8, 6, 4, 3]).unwrap();

    for trial in 0..10 {
        let theta = testkit::uniform_vec(&mut rng, 10, -2.0, 2.0);
        let (_, grad) = quadratic.loss_grad(&theta).unwrap();
        let fd = testkit::fd_grad(|t| quadratic.loss_grad(t).unwrap().0, &theta, 1e-6);
        for (g, f) in grad.iter().zip(&fd) {
            assert!((g - f).abs() <= 1e-6, "quadratic: {g} vs {f}");
            checked += 1;
        }

        let theta = testkit::uniform_vec(&mut rng, 7, -1.0, 1.0);
        let (_, grad) = logreg.loss_grad(&theta, &batch).unwrap();
        let fd = testkit::fd_grad(|t| logreg.loss_grad(t, &batch).unwrap().0, &theta, 1e-6);
        for (g, f) in grad.iter().zip(&fd) {
            assert!(
                (g - f).abs() <= 1e-6 * g.abs().max(1.0),
                "logreg: {g} vs {f}"
            );
            checked += 1;
        }

        let theta = model.init_params(trial as u64);
        let inputs = testkit::uniform_vec(&mut rng, 5 * model.input_dim(), -1.0, 1.0);
        let labels: Vec<usize> = (0..5).map(|i| (i + trial) % model.num_classes()).collect();
        let (_, grad) = model.loss_grad(&theta, &inputs, &labels).unwrap();
        let fd = testkit::fd_grad(
            |t| model.loss_grad(t, &inputs, &labels).unwrap().0,
            &theta,
            1e-5,
        );
        for (g, f) in grad.iter().zip(&fd) {
            assert!(
                (g - f).abs() <= 1e-7_f64.max(1e-5 * g.abs()),
                "network: {g} vs {f}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 100);
    println!("[PASS] criterion 9: {checked} finite-difference gradient checks passed across three objectives");
}

#[test]
fn criterion_10_determinism_and_formats() {
    // Identical invocations produce byte-identical CSVs.
    let make_config = |out: std::path::PathBuf| {
        let mut config = parse_config_str(
            "problem = mlp-synth\noptimizer = adagrad-bma\nlr = 0.1\nepochs = 2\nseed = 9\n\
             train-n = 120\ntest-n = 60\n",
        )
        .unwrap()
        .resolve()
        .unwrap();
        config.out = out;
        config
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_experiment(&make_config(dir_a.path().to_path_buf())).unwrap();
    run_experiment(&make_config(dir_b.path().to_path_buf())).unwrap();
    let mut compared = 0;
    for entry in std::fs::read_dir(dir_a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir_a.path().join(&name)).unwrap();
        let b = std::fs::read(dir_b.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between identical runs");
        compared += 1;
    }
    assert!(compared >= 2);

    // IDX fixtures: one valid parse plus five corruption classes.
    use data_io::idx::fixture::{image_bytes, label_bytes};
    let dir = tempfile::tempdir().unwrap();
    let images = image_bytes(&[vec![0u8, 255, 128, 64], vec![9, 8, 7, 6]], 2, 2);
    let labels = label_bytes(&[1, 3]);
    let write = |img: &[u8], lbl: &[u8]| {
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        std::fs::write(&ip, img).unwrap();
        std::fs::write(&lp, lbl).unwrap();
        data_io::load_idx(&ip, &lp)
    };
    let ds = write(&images, &labels).unwrap();
    assert_eq!(ds.sample(0)[1], 1.0);
    assert_eq!(ds.sample(0)[0], 0.0);
    assert_eq!(ds.labels, vec![1, 3]);

    let mut bad_image_magic = images.clone();
    bad_image_magic[3] = 0x01;
    assert!(matches!(
        write(&bad_image_magic, &labels),
        Err(data_io::Error::Format {
            field: "image magic",
            ..
        })
    ));
    let mut bad_label_magic = labels.clone();
    bad_label_magic[3] = 0x02;
    assert!(matches!(
        write(&images, &bad_label_magic),
        Err(data_io::Error::Format {
            field: "label magic",
            ..
        })
    ));
    assert!(matches!(
        write(&images[..images.len() - 2], &labels),
        Err(data_io::Error::Format {
            field: "image data",
            ..
        })
    ));
    assert!(matches!(
        write(&images[..9], &labels),
        Err(data_io::Error::Format {
            field: "image rows",
            ..
        })
    ));
    assert!(matches!(
        write(&images, &label_bytes(&[1, 3, 5])),
        Err(data_io::Error::Format {
            field: "label count",
            ..
        })
    ));

    // The self-test binary exits 0 well inside its budget.
    let started = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_bma"))
        .arg("selftest")
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    assert_eq!(
        out.status.code(),
        Some(0),
        "selftest failed: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(elapsed.as_secs_f64() < 60.0, "selftest took {elapsed:?}");

    println!(
        "[PASS] criterion 10: {compared} files byte-identical across runs, six IDX fixtures behave, \
         selftest exit 0 in {elapsed:?}"
    );
}
