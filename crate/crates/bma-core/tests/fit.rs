use bma_core::{best_fit, frobenius_error, BmaMatrix, ErrorMode, Partition};
use proptest::prelude::*;
use smalldense::DenseMatrix;

fn partition(sizes: &[usize]) -> Partition {
    Partition::new(sizes.to_vec()).unwrap()
}

#[test]
fn fit_recovers_block_mean_matrix_exactly() {
    let mut rng = testkit::rng(31);
    for _ in 0..40 {
        let p = testkit::random_partition(&mut rng, 24, 6);
        let l = p.block_count();
        let lambda = testkit::uniform_vec(&mut rng, l, -2.0, 2.0);
        let mut b = testkit::uniform_matrix(&mut rng, l, l, -2.0, 2.0);
        // The fit pins b_ii to zero on singleton blocks; generate in-family.
        for i in 0..l {
            if p.sizes()[i] == 1 {
                b.set(i, i, 0.0);
            }
        }
        let m0 = BmaMatrix::new(p.clone(), lambda, b).unwrap();
        let fit = best_fit(&m0.expand(), &p).unwrap();
        assert_eq!(fit.lambda(), m0.lambda(), "lambda not recovered exactly");
        assert_eq!(fit.b(), m0.b(), "b not recovered exactly");
        let err = frobenius_error(&m0.expand(), &fit, ErrorMode::SquaredFrobenius).unwrap();
        assert_eq!(err, 0.0, "fixed point should have zero error");
    }
}

#[test]
fn fit_matches_normal_equations_oracle() {
    let mut rng = testkit::rng(57);
    for trial in 0..25 {
        let m = testkit::uniform_matrix(&mut rng, 6, 6, -3.0, 3.0);
        let p = partition(&[2, 3, 1]);
        let fit = best_fit(&m, &p).unwrap();
        let (lambda, b, fitted) = testkit::normal_equations_best_fit(&m, &p);
        for (got, want) in fit.lambda().iter().zip(&lambda) {
            assert!(
                (got - want).abs() <= 1e-10,
                "trial {trial}: lambda {got} vs {want}"
            );
        }
        assert!(fit.b().max_abs_diff(&b).unwrap() <= 1e-10);
        assert!(fit.expand().max_abs_diff(&fitted).unwrap() <= 1e-10);
    }
}

#[test]
fn fit_of_identity_on_single_block_is_exact() {
    let d = 7;
    let m = DenseMatrix::identity(d);
    let p = Partition::single_block(d).unwrap();
    let fit = best_fit(&m, &p).unwrap();
    assert_eq!(fit.lambda(), &[1.0]);
    assert_eq!(fit.b().get(0, 0), 0.0);
    assert_eq!(
        frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).unwrap(),
        0.0
    );
}

#[test]
fn perturbing_any_fit_coefficient_never_reduces_error() {
    let mut rng = testkit::rng(77);
    for _ in 0..10 {
        let d = 12;
        let m = testkit::uniform_matrix(&mut rng, d, d, -2.0, 2.0);
        let p = testkit::random_partition(&mut rng, d, 4);
        let fit = best_fit(&m, &p).unwrap();
        let base = frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).unwrap();
        let l = p.block_count();
        for delta in [1e-3, 1e-1] {
            for sign in [-1.0, 1.0] {
                let step = sign * delta;
                for i in 0..l {
                    let mut lambda = fit.lambda().to_vec();
                    lambda[i] += step;
                    let perturbed = BmaMatrix::new(p.clone(), lambda, fit.b().clone()).unwrap();
                    let err = frobenius_error(&m, &perturbed, ErrorMode::SquaredFrobenius).unwrap();
                    assert!(err >= base - 1e-12, "lambda[{i}] {step:+e}: {err} < {base}");
                }
                for i in 0..l {
                    for j in 0..l {
                        let mut b = fit.b().clone();
                        b.set(i, j, b.get(i, j) + step);
                        let perturbed =
                            BmaMatrix::new(p.clone(), fit.lambda().to_vec(), b).unwrap();
                        let err =
                            frobenius_error(&m, &perturbed, ErrorMode::SquaredFrobenius).unwrap();
                        assert!(err >= base - 1e-12, "b[{i}][{j}] {step:+e}: {err} < {base}");
                    }
                }
            }
        }
    }
}

#[test]
fn streamed_error_matches_dense_difference() {
    let mut rng = testkit::rng(91);
    for _ in 0..20 {
        let d = 15;
        let m = testkit::uniform_matrix(&mut rng, d, d, -2.0, 2.0);
        let p = testkit::random_partition(&mut rng, d, 5);
        let fit = best_fit(&m, &p).unwrap();
        let streamed = frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).unwrap();
        let dense = {
            let diff = fit.expand().sub(&m).unwrap();
            let f = diff.frobenius_norm();
            f * f
        };
        assert!(
            (streamed - dense).abs() <= 1e-9 * dense.max(1e-12),
            "streamed {streamed} vs dense {dense}"
        );
        let mse = frobenius_error(&m, &fit, ErrorMode::Mse).unwrap();
        assert!((mse - streamed / (d * d) as f64).abs() <= 1e-15 * streamed.max(1.0));
    }
}

#[test]
fn best_fit_of_symmetric_matrix_is_flagged_symmetric() {
    let mut rng = testkit::rng(13);
    let m = testkit::random_spd(&mut rng, 10);
    let p = partition(&[3, 3, 4]);
    let fit = best_fit(&m, &p).unwrap();
    assert!(fit.is_symmetric());
}

/// Splits each block of `coarse` into one or two pieces to build a
/// refinement.
fn refine(coarse: &Partition, rng: &mut rand_chacha::ChaCha8Rng) -> Partition {
    use rand::Rng;
    let mut sizes = Vec::new();
    for &s in coarse.sizes() {
        if s >= 2 && rng.random_range(0..2) == 1 {
            let cut = rng.random_range(1..s);
            sizes.push(cut);
            sizes.push(s - cut);
        } else {
            sizes.push(s);
        }
    }
    Partition::new(sizes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn singleton_fit_is_lossless_for_any_matrix(seed in 0u64..2000) {
        let mut rng = testkit::rng(seed);
        let d = 1 + (seed as usize % 12);
        let m = testkit::uniform_matrix(&mut rng, d, d, -5.0, 5.0);
        let p = Partition::singletons(d).unwrap();
        let fit = best_fit(&m, &p).unwrap();
        prop_assert_eq!(fit.expand(), m.clone());
        prop_assert_eq!(frobenius_error(&m, &fit, ErrorMode::SquaredFrobenius).unwrap(), 0.0);
    }

    #[test]
    fn refinement_never_increases_error(seed in 0u64..2000) {
        let mut rng = testkit::rng(seed);
        let d = 6 + (seed as usize % 14);
        let m = testkit::random_symmetric(&mut rng, d, 2.0);
        let coarse = testkit::random_partition(&mut rng, d, 4);
        let fine = refine(&coarse, &mut rng);
        prop_assert!(fine.refines(&coarse));

        let err_fine = frobenius_error(&m, &best_fit(&m, &fine).unwrap(), ErrorMode::SquaredFrobenius).unwrap();
        let err_coarse = frobenius_error(&m, &best_fit(&m, &coarse).unwrap(), ErrorMode::SquaredFrobenius).unwrap();
        prop_assert!(
            err_fine <= err_coarse + 1e-12,
            "refinement increased error: {} > {}", err_fine, err_coarse
        );
    }
}
