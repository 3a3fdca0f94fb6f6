//! K-fold cross-validation of the tuned penalty at a fixed `λ₂`.
//!
//! Each fold re-runs the kernel partial-out on its training rows only; the
//! held-out rows are residualized by smoothing them against the training
//! rows, so no held-out value enters the trained model.

use ndarray::{s, Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::smoothing::{nw_smooth_at, partial_out, PartialResiduals, SmootherConfig};
use crate::solver::{self, fit_path_xy, fit_ridge_xy, lambda_max, Method, PenaltySpec, SolverOptions};

/// Smallest-to-largest ratio of the default λ₁ grid.
pub const GRID_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub k: usize,
    /// Descending values of the tuned penalty: λ₁, or λ₂ for ridge.
    pub grid: Vec<f64>,
    /// Fixed λ₂ for the elastic net; ignored for ridge.
    pub lambda2: f64,
    pub seed: u64,
    pub fold_assignment: Vec<usize>,
    /// Pick the largest penalty within one standard error of the minimum.
    pub one_se: bool,
}

impl CvPlan {
    pub fn new(n: usize, k: usize, seed: u64, grid: Vec<f64>, lambda2: f64) -> Result<Self> {
        let plan = CvPlan {
            k,
            grid,
            lambda2,
            seed,
            fold_assignment: make_folds(n, k, seed)?,
            one_se: false,
        };
        plan.validate(n)?;
        Ok(plan)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > n {
            return Err(Error::Plan(format!("need 2 ≤ k ≤ n, got k = {} with n = {n}", self.k)));
        }
        if self.fold_assignment.len() != n {
            return Err(Error::Plan(format!(
                "fold assignment has {} entries for {n} observations",
                self.fold_assignment.len()
            )));
        }
        let sizes = fold_sizes(&self.fold_assignment, self.k)?;
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        if *lo == 0 || hi - lo > 1 {
            return Err(Error::Plan(format!("unbalanced folds {sizes:?}")));
        }
        if self.grid.is_empty() {
            return Err(Error::Plan("empty penalty grid".into()));
        }
        if self.grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Plan("grid values must be finite and non-negative".into()));
        }
        if self.grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Plan("grid must be strictly descending".into()));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::Plan(format!("invalid lambda2 {}", self.lambda2)));
        }
        Ok(())
    }
}

fn fold_sizes(assignment: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut sizes = vec![0usize; k];
    for &f in assignment {
        if f >= k {
            return Err(Error::Plan(format!("fold id {f} out of range for k = {k}")));
        }
        sizes[f] += 1;
    }
    Ok(sizes)
}

/// Random balanced partition of `0..n` into `k` folds, deterministic in
/// `seed`.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > n {
        return Err(Error::Plan(format!("need 2 ≤ k ≤ n, got k = {k} with n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    Ok(folds)
}

/// `size` values log-spaced from `top` down to `top · ratio`.
pub fn log_grid(top: f64, ratio: f64, size: usize) -> Vec<f64> {
    if size == 1 {
        return vec![top];
    }
    let step = ratio.ln() / (size - 1) as f64;
    (0..size)
        .map(|i| if i == 0 { top } else { top * (step * i as f64).exp() })
        .collect()
}

/// λ₁ grid from `λ_max = max_k |2 x̃_k'ỹ| / w_k` down to `λ_max · 1e-4`.
pub fn default_lambda1_grid(pr: &PartialResiduals, spec: &PenaltySpec, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::DegenerateGrid(format!("grid size must be ≥ 2, got {grid_size}")));
    }
    let top = lambda_max(pr, spec);
    if !(top > 0.0) {
        return Err(Error::DegenerateGrid("lambda_max is zero (no correlation between design and response)".into()));
    }
    Ok(log_grid(top, GRID_RATIO, grid_size))
}

/// λ₂ grid for ridge, scaled to the average column energy of the design.
pub fn default_ridge_grid(pr: &PartialResiduals, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::DegenerateGrid(format!("grid size must be ≥ 2, got {grid_size}")));
    }
    let energy = pr.x_tilde.iter().map(|v| v * v).sum::<f64>() / pr.p() as f64;
    if !(energy > 0.0) {
        return Err(Error::DegenerateGrid("design is identically zero".into()));
    }
    Ok(log_grid(100.0 * energy, 1e-6, grid_size))
}

/// One training/held-out split with the smoothing already applied.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub train: PartialResiduals,
    pub test_x: Array2<f64>,
    pub test_y: Array1<f64>,
    /// Held-out rows smoothed with the training global mean.
    pub fallback: usize,
}

/// Partial-out per fold: training rows on their own, held-out rows against
/// the training rows.
pub fn prepare_folds(
    data: &Dataset,
    assignment: &[usize],
    k: usize,
    smoother: &SmootherConfig,
) -> Result<Vec<PreparedFold>> {
    if assignment.len() != data.n() {
        return Err(Error::Plan("fold assignment does not match data".into()));
    }
    (0..k)
        .into_par_iter()
        .map(|f| {
            let train_rows: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] != f).collect();
            let test_rows: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] == f).collect();
            let train = data.select_rows(&train_rows)?;
            let pr = partial_out(&train, smoother)?;

            let p = data.p();
            let mut joint = Array2::zeros((train.n(), p + 1));
            joint.column_mut(0).assign(&train.y());
            joint.slice_mut(s![.., 1..]).assign(&train.x());
            let t_test = data.t().select(Axis(0), &test_rows);
            let (m, fb) = nw_smooth_at(joint.view(), train.t(), t_test.view(), smoother)?;
            let test_y = data.y().select(Axis(0), &test_rows) - m.column(0);
            let test_x = data.x().select(Axis(0), &test_rows) - m.slice(s![.., 1..]);
            Ok(PreparedFold {
                train: pr,
                test_x,
                test_y,
                fallback: fb.len(),
            })
        })
        .collect()
}

/// Largest λ_max over the full data and every training fold, so that the
/// first grid point zeroes every fold's model.
pub fn cv_lambda1_grid(
    full: &PartialResiduals,
    folds: &[PreparedFold],
    spec: &PenaltySpec,
    grid_size: usize,
) -> Result<Vec<f64>> {
    let mut grid = default_lambda1_grid(full, spec, grid_size)?;
    let top = folds
        .iter()
        .map(|f| lambda_max(&f.train, spec))
        .fold(grid[0], f64::max);
    if top > grid[0] {
        grid = log_grid(top, GRID_RATIO, grid_size);
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub grid: Vec<f64>,
    /// Mean held-out squared error per grid point.
    pub mean_cv_error: Vec<f64>,
    pub se_cv_error: Vec<f64>,
    pub best_lambda1: f64,
    pub best_index: usize,
    /// Index picked by the one-standard-error rule.
    pub one_se_index: usize,
    /// `fold_errors[f][g]`.
    pub fold_errors: Vec<Vec<f64>>,
    /// Non-zero coefficient counts of each fold's model, `[f][g]`.
    pub fold_nonzero: Vec<Vec<usize>>,
    pub fallback_count: usize,
    pub nonconverged_fits: usize,
}

impl CvResult {
    /// Index the plan's rule selects.
    pub fn selected_index(&self, one_se: bool) -> usize {
        if one_se {
            self.one_se_index
        } else {
            self.best_index
        }
    }
}

fn check_template(plan: &CvPlan, template: &PenaltySpec) -> Result<PenaltySpec> {
    let mut t = template.clone();
    match t.method {
        Method::Ridge => {}
        Method::Enet => t.lambda2 = plan.lambda2,
        _ if plan.lambda2 != 0.0 => {
            return Err(Error::Penalty(format!(
                "{} cannot be cross-validated with lambda2 = {}",
                t.method, plan.lambda2
            )))
        }
        _ => {}
    }
    Ok(t)
}

/// Held-out errors of one fold along the grid.
fn fold_path(
    fold: &PreparedFold,
    grid: &[f64],
    template: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<usize>, usize)> {
    let tr = &fold.train;
    let fits = if template.method == Method::Ridge && grid.iter().all(|&v| v > 0.0) {
        grid.iter()
            .map(|&l2| fit_ridge_xy(tr.x_tilde.view(), tr.y_tilde.view(), &tr.column_names, l2))
            .collect::<Result<Vec<_>>>()?
    } else {
        fit_path_xy(tr.x_tilde.view(), tr.y_tilde.view(), &tr.column_names, template, grid, opts)?
    };
    let m = fold.test_y.len() as f64;
    let mut errors = Vec::with_capacity(grid.len());
    let mut nonzero = Vec::with_capacity(grid.len());
    let mut bad = 0;
    for f in &fits {
        let pred = fold.test_x.dot(&Array1::from(f.beta.values.clone()));
        let e = (&fold.test_y - &pred).mapv(|v| v * v).sum() / m;
        errors.push(e);
        nonzero.push(f.beta.nonzero_count());
        if !f.converged {
            bad += 1;
        }
    }
    Ok((errors, nonzero, bad))
}

/// Cross-validation over already prepared folds.
pub fn cross_validate_prepared(
    folds: &[PreparedFold],
    plan: &CvPlan,
    template: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<CvResult> {
    let template = check_template(plan, template)?;
    if folds.len() != plan.k {
        return Err(Error::Plan(format!("{} prepared folds for k = {}", folds.len(), plan.k)));
    }
    let per_fold: Vec<(Vec<f64>, Vec<usize>, usize)> = folds
        .par_iter()
        .map(|f| fold_path(f, &plan.grid, &template, opts))
        .collect::<Result<_>>()?;

    let k = folds.len() as f64;
    let g = plan.grid.len();
    let mut mean = vec![0.0; g];
    let mut se = vec![0.0; g];
    for j in 0..g {
        let errs: Vec<f64> = per_fold.iter().map(|(e, _, _)| e[j]).collect();
        let m = errs.iter().sum::<f64>() / k;
        let var = errs.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (k - 1.0);
        mean[j] = m;
        se[j] = (var / k).sqrt();
    }
    // ties resolve to the first (largest) penalty
    let best_index = (0..g).fold(0, |b, j| if mean[j] < mean[b] { j } else { b });
    let cutoff = mean[best_index] + se[best_index];
    let one_se_index = (0..=best_index).find(|&j| mean[j] <= cutoff).unwrap_or(best_index);

    Ok(CvResult {
        grid: plan.grid.clone(),
        best_lambda1: plan.grid[best_index],
        best_index,
        one_se_index,
        mean_cv_error: mean,
        se_cv_error: se,
        fallback_count: folds.iter().map(|f| f.fallback).sum(),
        nonconverged_fits: per_fold.iter().map(|(_, _, b)| b).sum(),
        fold_errors: per_fold.iter().map(|(e, _, _)| e.clone()).collect(),
        fold_nonzero: per_fold.into_iter().map(|(_, nz, _)| nz).collect(),
    })
}

/// K-fold cross-validation of `template` over `plan.grid`.
pub fn cross_validate(
    data: &Dataset,
    plan: &CvPlan,
    smoother: &SmootherConfig,
    template: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<CvResult> {
    plan.validate(data.n())?;
    let folds = prepare_folds(data, &plan.fold_assignment, plan.k, smoother)?;
    cross_validate_prepared(&folds, plan, template, opts)
}

/// Fits the whole data at the selected grid point.
pub fn refit(
    pr: &PartialResiduals,
    template: &PenaltySpec,
    value: f64,
    opts: &SolverOptions,
) -> Result<solver::FitResult> {
    let spec = template.with_tuned_value(value);
    if spec.method == Method::Ridge && spec.lambda2 > 0.0 {
        solver::fit_ridge_closed_form(pr, spec.lambda2)
    } else {
        solver::fit(pr, &spec, opts)
    }
}
