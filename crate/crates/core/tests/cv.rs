mod common;

use approx::assert_abs_diff_eq;
use ndarray::{Array1, Array2};
use rand::Rng;

use plm_enet::data::{standardize, Dataset};
use plm_enet::selection::{cross_validate, cv_lambda1_grid, make_folds, prepare_folds, CvPlan};
use plm_enet::smoothing::partial_out;
use plm_enet::{Kernel, PenaltySpec, SmootherConfig, SolverOptions};

fn tight() -> SolverOptions {
    SolverOptions {
        tolerance: 1e-11,
        max_iterations: 100_000,
        ..Default::default()
    }
}

fn soft(z: f64, g: f64) -> f64 {
    z.signum() * (z.abs() - g).max(0.0)
}

/// Leave-one-out error of the one-predictor lasso, with the smoother wide
/// enough that partialling out is plain centring on the training rows.
#[test]
fn leave_one_out_matches_closed_form() {
    let x = [0.3, -1.2, 2.0, 0.7, -0.4, 1.5];
    let y = [1.0, -2.1, 3.9, 1.1, -0.2, 2.4];
    let t = [-0.9, -0.5, -0.1, 0.2, 0.6, 0.95];
    let data = Dataset::new(
        Array1::from(y.to_vec()),
        Array1::from(t.to_vec()),
        Array2::from_shape_vec((6, 1), x.to_vec()).unwrap(),
        common::names(1),
    )
    .unwrap();
    let smoother = SmootherConfig::fixed(Kernel::Box, 100.0).unwrap();
    let grid = vec![20.0, 8.0, 3.0, 1.0, 0.1];
    let plan = CvPlan::new(6, 6, 3, grid.clone(), 0.0).unwrap();
    let cv = cross_validate(&data, &plan, &smoother, &PenaltySpec::lasso(0.0), &tight()).unwrap();

    for (g, &lambda) in grid.iter().enumerate() {
        let mut errors = Vec::new();
        for i in 0..6 {
            let train: Vec<usize> = (0..6).filter(|&j| j != i).collect();
            let xm = train.iter().map(|&j| x[j]).sum::<f64>() / 5.0;
            let ym = train.iter().map(|&j| y[j]).sum::<f64>() / 5.0;
            let sxy: f64 = train.iter().map(|&j| (x[j] - xm) * (y[j] - ym)).sum();
            let sxx: f64 = train.iter().map(|&j| (x[j] - xm).powi(2)).sum();
            let b = soft(2.0 * sxy, lambda) / (2.0 * sxx);
            errors.push(((y[i] - ym) - b * (x[i] - xm)).powi(2));
        }
        let mean = errors.iter().sum::<f64>() / 6.0;
        assert_abs_diff_eq!(cv.mean_cv_error[g], mean, epsilon = 1e-10);
    }
    assert_eq!(cv.fallback_count, 0);
}

fn strong_signal(seed: u64, n: usize) -> Dataset {
    let mut rng = common::rng(seed);
    let x = common::random_design(&mut rng, n, 5, 0.3);
    let t = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
    let beta = Array1::from(vec![2.0, -1.5, 1.0, 0.8, -1.2]);
    let noise = Array1::from_shape_fn(n, |_| 0.05 * rng.random_range(-1.0..1.0));
    let y = x.dot(&beta) + t.mapv(|s: f64| (2.0 * s).sin()) + noise;
    Dataset::new(y, t, x, common::names(5)).unwrap()
}

#[test]
fn first_grid_point_zeroes_every_fold() {
    for seed in 0..5 {
        let (d, _) = standardize(&strong_signal(seed, 120)).unwrap();
        let sm = SmootherConfig::rule_of_thumb(Kernel::Box, d.n(), 1.0).unwrap();
        let pr = partial_out(&d, &sm).unwrap();
        let assignment = make_folds(d.n(), 5, seed).unwrap();
        let folds = prepare_folds(&d, &assignment, 5, &sm).unwrap();
        for template in [PenaltySpec::lasso(0.0), PenaltySpec::enet(0.0, 2.0)] {
            let grid = cv_lambda1_grid(&pr, &folds, &template, 20).unwrap();
            let plan = CvPlan::new(d.n(), 5, seed, grid, template.lambda2).unwrap();
            let cv = cross_validate(&d, &plan, &sm, &template, &SolverOptions::default()).unwrap();
            assert!(cv.fold_nonzero.iter().all(|f| f[0] == 0));
        }
    }
}

#[test]
fn strong_signal_selects_small_penalty() {
    for seed in 0..20 {
        let (d, _) = standardize(&strong_signal(100 + seed, 200)).unwrap();
        let sm = SmootherConfig::rule_of_thumb(Kernel::Box, d.n(), 1.0).unwrap();
        let pr = partial_out(&d, &sm).unwrap();
        let assignment = make_folds(d.n(), 5, seed).unwrap();
        let folds = prepare_folds(&d, &assignment, 5, &sm).unwrap();
        let template = PenaltySpec::lasso(0.0);
        let grid = cv_lambda1_grid(&pr, &folds, &template, 40).unwrap();
        let plan = CvPlan::new(d.n(), 5, seed, grid.clone(), 0.0).unwrap();
        let cv = cross_validate(&d, &plan, &sm, &template, &SolverOptions::default()).unwrap();
        assert!(
            cv.best_index >= 30,
            "seed {seed}: chose index {} of {}",
            cv.best_index,
            grid.len()
        );
        assert!(cv.one_se_index <= cv.best_index);
        let j = cv.one_se_index;
        assert!(cv.mean_cv_error[j] <= cv.mean_cv_error[cv.best_index] + cv.se_cv_error[cv.best_index]);
    }
}

#[test]
fn thread_count_does_not_change_result() {
    let (d, _) = standardize(&strong_signal(7, 150)).unwrap();
    let sm = SmootherConfig::rule_of_thumb(Kernel::Epanechnikov, d.n(), 1.0).unwrap();
    let pr = partial_out(&d, &sm).unwrap();
    let template = PenaltySpec::enet(0.0, 0.5);
    let grid = plm_enet::selection::default_lambda1_grid(&pr, &template, 15).unwrap();
    let plan = CvPlan::new(d.n(), 10, 42, grid, 0.5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cross_validate(&d, &plan, &sm, &template, &SolverOptions::default()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
}

#[test]
fn ridge_template_tunes_lambda2() {
    let (d, _) = standardize(&strong_signal(9, 100)).unwrap();
    let sm = SmootherConfig::rule_of_thumb(Kernel::Box, d.n(), 1.0).unwrap();
    let pr = partial_out(&d, &sm).unwrap();
    let grid = plm_enet::selection::default_ridge_grid(&pr, 12).unwrap();
    let plan = CvPlan::new(d.n(), 4, 1, grid.clone(), 0.0).unwrap();
    let cv = cross_validate(&d, &plan, &sm, &PenaltySpec::ridge(1.0), &SolverOptions::default()).unwrap();
    assert_eq!(cv.grid, grid);
    // heavy shrinkage is worse than light shrinkage on this signal
    assert!(cv.mean_cv_error[0] > cv.mean_cv_error[grid.len() - 1]);
}
