//! Central finite-difference verification for every gradient implementation.

use models::{LogisticRegressionProblem, MlpModel, QuadraticProblem};

#[test]
fn quadratic_gradient_matches_finite_differences() {
    let mut rng = testkit::rng(1001);
    for _ in 0..10 {
        let q = testkit::random_spd(&mut rng, 6);
        let problem = QuadraticProblem::new(q).unwrap();
        let theta = testkit::uniform_vec(&mut rng, 6, -2.0, 2.0);
        let (_, grad) = problem.loss_grad(&theta).unwrap();
        let fd = testkit::fd_grad(|t| problem.loss_grad(t).unwrap().0, &theta, 1e-6);
        for (g, f) in grad.iter().zip(&fd) {
            assert!((g - f).abs() <= 1e-6, "{g} vs {f}");
        }
    }
}

#[test]
fn logreg_gradient_matches_finite_differences() {
    let mut rng = testkit::rng(1002);
    let n = 12;
    let p = 5;
    let features = testkit::uniform_vec(&mut rng, n * p, -2.0, 2.0);
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let problem = LogisticRegressionProblem::new(features, labels, p, 0.1).unwrap();
    let batch: Vec<usize> = (0..n).collect();
    for _ in 0..10 {
        let theta = testkit::uniform_vec(&mut rng, p + 1, -1.0, 1.0);
        let (_, grad) = problem.loss_grad(&theta, &batch).unwrap();
        let fd = testkit::fd_grad(|t| problem.loss_grad(t, &batch).unwrap().0, &theta, 1e-6);
        for (g, f) in grad.iter().zip(&fd) {
            let tol = 1e-6 * g.abs().max(1.0);
            assert!((g - f).abs() <= tol, "{g} vs {f}");
        }
    }
}

#[test]
fn mlp_gradient_matches_finite_differences_on_every_coordinate() {
    let mut rng = testkit::rng(1003);
    let model = MlpModel::new(vec![8, 6, 4, 3]).unwrap();
    let theta = model.init_params(7);
    let batch = 5;
    let inputs = testkit::uniform_vec(&mut rng, batch * model.input_dim(), -1.0, 1.0);
    let labels: Vec<usize> = (0..batch).map(|i| i % model.num_classes()).collect();

    let (_, grad) = model.loss_grad(&theta, &inputs, &labels).unwrap();
    let fd = testkit::fd_grad(
        |t| model.loss_grad(t, &inputs, &labels).unwrap().0,
        &theta,
        1e-5,
    );
    for (i, (g, f)) in grad.iter().zip(&fd).enumerate() {
        let err = (g - f).abs();
        let tol = 1e-7_f64.max(1e-5 * g.abs());
        assert!(
            err <= tol,
            "coordinate {i}: analytic {g}, numeric {f}, err {err}"
        );
    }
}

#[test]
fn randomized_coordinate_checks_all_pass() {
    // At least a hundred randomly chosen coordinates across all three
    // objectives.
    let mut rng = testkit::rng(1004);
    let mut checked = 0usize;

    let q = testkit::random_spd(&mut rng, 10);
    let quadratic = QuadraticProblem::new(q).unwrap();
    let model = MlpModel::new(vec![6, 5, 3]).unwrap();
    let features = testkit::uniform_vec(&mut rng, 20 * 4, -1.5, 1.5);
    let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
    let logreg = LogisticRegressionProblem::new(features, labels, 4, 0.05).unwrap();
    let batch: Vec<usize> = (0..20).collect();

    for trial in 0..12 {
        let theta_q = testkit::uniform_vec(&mut rng, 10, -2.0, 2.0);
        let (_, gq) = quadratic.loss_grad(&theta_q).unwrap();
        let fdq = testkit::fd_grad(|t| quadratic.loss_grad(t).unwrap().0, &theta_q, 1e-6);

        let theta_l = testkit::uniform_vec(&mut rng, 5, -1.0, 1.0);
        let (_, gl) = logreg.loss_grad(&theta_l, &batch).unwrap();
        let fdl = testkit::fd_grad(|t| logreg.loss_grad(t, &batch).unwrap().0, &theta_l, 1e-6);

        let theta_m = model.init_params(trial as u64);
        let x = testkit::uniform_vec(&mut rng, model.input_dim(), -1.0, 1.0);
        let (_, gm) = model.loss_grad(&theta_m, &x, &[trial % 3]).unwrap();
        let fdm = testkit::fd_grad(
            |t| model.loss_grad(t, &x, &[trial % 3]).unwrap().0,
            &theta_m,
            1e-5,
        );

        for (g, f) in gq.iter().zip(&fdq) {
            assert!((g - f).abs() <= 1e-6);
            checked += 1;
        }
        for (g, f) in gl.iter().zip(&fdl) {
            assert!((g - f).abs() <= 1e-6 * g.abs().max(1.0));
            checked += 1;
        }
        for (g, f) in gm.iter().zip(&fdm) {
            assert!((g - f).abs() <= 1e-7_f64.max(1e-5 * g.abs()));
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} coordinates checked");
}
