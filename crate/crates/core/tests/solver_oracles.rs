mod common;

use approx::assert_abs_diff_eq;
use ndarray::{Array1, Array2};
use rand::Rng;

use plm_enet::data::{standardize, unstandardize_coefficients, Dataset};
use plm_enet::solver::{augment_to_lasso, fit, fit_alasso, fit_path, fit_ridge_closed_form, lambda_max, AlassoOptions};
use plm_enet::{PartialResiduals, PenaltySpec, SolverOptions};

fn tight() -> SolverOptions {
    SolverOptions {
        tolerance: 1e-11,
        max_iterations: 200_000,
        ..Default::default()
    }
}

fn instance(seed: u64, n: usize, p: usize, rho: f64) -> PartialResiduals {
    let mut rng = common::rng(seed);
    let x = common::random_design(&mut rng, n, p, rho);
    let y = common::random_response(&mut rng, &x, 0.6, 0.3);
    PartialResiduals::from_linear(x, y, common::names(p)).unwrap()
}

#[test]
fn enet_matches_fista() {
    for seed in 0..25 {
        let pr = instance(seed, 40 + seed as usize, 2 + seed as usize % 9, 0.6);
        for lambda2 in [0.1, 1.0, 10.0] {
            let l1 = 0.3 * lambda_max(&pr, &PenaltySpec::enet(0.0, lambda2));
            let f = fit(&pr, &PenaltySpec::enet(l1, lambda2), &tight()).unwrap();
            assert!(f.converged);
            let oracle = common::fista_enet(pr.x_tilde.view(), pr.y_tilde.view(), l1, lambda2, 100_000);
            for (a, b) in f.coefficients().iter().zip(&oracle) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-7);
            }
        }
    }
}

#[test]
fn ridge_closed_form_matches_normal_equations() {
    for seed in 0..20 {
        let pr = instance(100 + seed, 30, 8, 0.9);
        let f = fit_ridge_closed_form(&pr, 0.5).unwrap();
        let oracle = common::ridge(pr.x_tilde.view(), pr.y_tilde.view(), 0.5);
        for (a, b) in f.coefficients().iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}

#[test]
fn small_problems_match_brute_force() {
    for seed in 0..8 {
        let p = 1 + seed as usize % 3;
        let pr = instance(200 + seed, 25, p, 0.5);
        let spec = PenaltySpec::enet(0.2 * lambda_max(&pr, &PenaltySpec::enet(0.0, 2.0)), 2.0);
        let f = fit(&pr, &spec, &tight()).unwrap();
        let oracle = common::brute_force_enet(pr.x_tilde.view(), pr.y_tilde.view(), spec.lambda1, 2.0, 10.0);
        for (a, b) in f.coefficients().iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 5e-3);
        }
    }
}

#[test]
fn weighted_penalty_matches_brute_force() {
    for seed in 0..6 {
        let pr = instance(300 + seed, 30, 3, 0.4);
        let opts = AlassoOptions::default();
        let f = fit_alasso(&pr, 2.0, &opts, &tight()).unwrap();
        let weights = plm_enet::solver::adaptive_weights(&pr, &opts).unwrap();
        let (x, y) = (pr.x_tilde.view(), pr.y_tilde.view());
        let objective = |b: &[f64]| {
            let r = &y - &x.dot(&Array1::from(b.to_vec()));
            r.dot(&r) + 2.0 * b.iter().zip(&weights).map(|(bj, w)| w * bj.abs()).sum::<f64>()
        };
        let oracle = common::brute_force_min(objective, 3, 10.0);
        for (a, b) in f.coefficients().iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 5e-3);
        }
    }
}

#[test]
fn augmented_lasso_reproduces_enet() {
    for seed in 0..10 {
        let pr = instance(400 + seed, 25, 12, 0.7);
        let l1 = 0.1 * lambda_max(&pr, &PenaltySpec::enet(0.0, 0.7));
        let direct = fit(&pr, &PenaltySpec::enet(l1, 0.7), &tight()).unwrap();
        let aug = augment_to_lasso(&pr, 0.7, l1).unwrap().solve(&tight()).unwrap();
        for (a, b) in direct.coefficients().iter().zip(&aug) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}

#[test]
fn warm_path_equals_cold_fits() {
    let pr = instance(500, 60, 10, 0.8);
    let template = PenaltySpec::enet(0.0, 0.5);
    let top = lambda_max(&pr, &template);
    let grid: Vec<f64> = (0..8).map(|i| top * 0.6f64.powi(i)).collect();
    let path = fit_path(&pr, &template, &grid, &tight()).unwrap();
    assert!(path[0].beta.nonzero_count() == 0);
    for (warm, &l1) in path.iter().zip(&grid) {
        let cold = fit(&pr, &template.with_tuned_value(l1), &tight()).unwrap();
        for (a, b) in warm.coefficients().iter().zip(cold.coefficients()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }
}

#[test]
fn standardized_ols_maps_back_to_raw_ols() {
    let mut rng = common::rng(600);
    let (n, p) = (50, 4);
    let mut x = common::random_design(&mut rng, n, p, 0.3);
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| 3.0 + (j as f64 + 1.0) * 5.0 * v);
    }
    let y = common::random_response(&mut rng, &x, 1.0, 0.2).mapv(|v| v + 7.0);
    let t = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
    let data = Dataset::new(y.clone(), t, x.clone(), common::names(p)).unwrap();
    let (ds, info) = standardize(&data).unwrap();
    let pr = PartialResiduals::from_linear(ds.x().to_owned(), ds.y().to_owned(), common::names(p)).unwrap();
    let f = fit(&pr, &PenaltySpec::ols(), &tight()).unwrap();
    let back = unstandardize_coefficients(&f.beta, &info).unwrap();

    let mut with_intercept = Array2::ones((n, p + 1));
    with_intercept.slice_mut(ndarray::s![.., 1..]).assign(&x);
    let oracle = common::ols(with_intercept.view(), y.view());
    assert_abs_diff_eq!(back.offset, oracle[0], epsilon = 1e-8);
    for (a, b) in back.coefficients.values.iter().zip(&oracle[1..]) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }
}

#[test]
fn rescaled_is_scaled_naive() {
    let pr = instance(700, 40, 6, 0.5);
    let spec = PenaltySpec::enet(3.0, 2.0);
    let naive = fit(&pr, &spec, &tight()).unwrap();
    let rescaled = fit(
        &pr,
        &spec,
        &SolverOptions {
            rescaled: true,
            ..tight()
        },
    )
    .unwrap();
    for (a, b) in naive.coefficients().iter().zip(rescaled.coefficients()) {
        assert_abs_diff_eq!(3.0 * a, b, epsilon = 1e-12);
    }
}
