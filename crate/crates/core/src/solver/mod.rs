//! Penalized least squares on partial residuals.
//!
//! All estimators minimize
//!
//! ```text
//! ‖ỹ − X̃β‖² + λ₂‖β‖² + λ₁ Σ_k w_k |β_k|
//! ```
//!
//! with `w_k = 1` except for the adaptive lasso. The elastic net result is
//! the plain ("naive") minimizer; [`SolverOptions::rescaled`] multiplies it
//! by `1 + λ₂` instead.

mod alasso;
mod augment;
mod cd;
pub mod convention;
mod penalty;
mod ridge;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::CoefficientVector;
use crate::error::{Error, Result};
use crate::smoothing::PartialResiduals;

pub use alasso::{adaptive_weights, fit_alasso, AlassoOptions};
pub use augment::{augment_to_lasso, AugmentedProblem};
pub use cd::soft_threshold;
pub use penalty::{Method, PenaltySpec};
pub use ridge::{fit_ridge_closed_form, fit_ridge_xy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold in gradient units. A fit is converged when
    /// every update of a full sweep moves its coordinate's stationarity
    /// condition by less than `tolerance` and every condition then holds to
    /// within `tolerance`.
    pub tolerance: f64,
    /// Maximum number of coordinate sweeps.
    pub max_iterations: usize,
    #[serde(skip)]
    pub warm_start: Option<Vec<f64>>,
    /// Record the objective after every sweep.
    #[serde(skip)]
    pub record_trace: bool,
    /// Return `(1 + λ₂) β̂` instead of the naive minimizer.
    #[serde(default)]
    pub rescaled: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iterations: 10_000,
            warm_start: None,
            record_trace: false,
            rescaled: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: CoefficientVector,
    /// `r̂ᵢ = ỹᵢ − Σⱼ β̂ⱼ x̃ᵢⱼ`.
    pub residuals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest stationarity violation at the returned coefficients.
    pub dual_gap_proxy: f64,
    /// Objective after each sweep, when requested.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl FitResult {
    pub fn coefficients(&self) -> &[f64] {
        &self.beta.values
    }
}

fn check_dims(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.len()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::Dimension("design has no columns".into()));
    }
    Ok(())
}

pub(crate) fn residuals(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, beta: &[f64]) -> Array1<f64> {
    y.to_owned() - x.dot(&ArrayView1::from(beta))
}

/// Evaluates the penalized objective at `beta` on a raw `(x, y)` pair.
pub fn objective_xy(
    beta: &[f64],
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    spec: &PenaltySpec,
) -> Result<f64> {
    check_dims(x, y)?;
    if beta.len() != x.ncols() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} columns",
            beta.len(),
            x.ncols()
        )));
    }
    spec.validate(x.ncols())?;
    let r = residuals(x, y, beta);
    Ok(r.dot(&r) + spec.penalty(beta))
}

/// `‖ỹ − X̃β‖² + λ₂‖β‖² + λ₁ Σ w_k |β_k|`.
pub fn objective(beta: &CoefficientVector, pr: &PartialResiduals, spec: &PenaltySpec) -> Result<f64> {
    objective_xy(&beta.values, pr.x_tilde.view(), pr.y_tilde.view(), spec)
}

/// Coordinate-descent fit on an arbitrary linear problem.
pub fn fit_xy(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    names: &[String],
    spec: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    check_dims(x, y)?;
    spec.validate(x.ncols())?;
    opts.validate()?;
    if names.len() != x.ncols() {
        return Err(Error::Dimension("column names do not match design".into()));
    }
    let l1 = spec.l1_levels(x.ncols());
    let out = cd::solve(x, y, &l1, spec.lambda2, opts);

    let mut notes = Vec::new();
    if spec.lambda2 == 0.0 && !out.duplicate_groups.is_empty() {
        notes.push(format!(
            "identical columns {:?} with lambda2 = 0: minimizer is not unique",
            out.duplicate_groups
        ));
    }
    let mut beta = out.beta;
    if opts.rescaled && spec.lambda2 > 0.0 {
        let factor = 1.0 + spec.lambda2;
        beta.iter_mut().for_each(|b| *b *= factor);
        notes.push(format!("coefficients rescaled by 1 + lambda2 = {factor}"));
    }
    let r = residuals(x, y, &beta);
    let objective = r.dot(&r) + spec.penalty(&beta);
    Ok(FitResult {
        beta: CoefficientVector::new(beta, names.to_vec())?,
        residuals: r.to_vec(),
        objective,
        iterations: out.iterations,
        converged: out.converged,
        dual_gap_proxy: out.max_violation,
        trace: out.trace,
        notes,
    })
}

/// Minimizes the penalized objective on the partial residuals by cyclic
/// coordinate descent.
pub fn fit(pr: &PartialResiduals, spec: &PenaltySpec, opts: &SolverOptions) -> Result<FitResult> {
    fit_xy(pr.x_tilde.view(), pr.y_tilde.view(), &pr.column_names, spec, opts)
}

/// Fits along a grid of the tuned penalty (λ₁, or λ₂ for ridge), each point
/// warm-started from the previous one. The grid should be descending.
pub fn fit_path_xy(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    names: &[String],
    template: &PenaltySpec,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<FitResult>> {
    let mut out = Vec::with_capacity(grid.len());
    let mut warm: Option<Vec<f64>> = opts.warm_start.clone();
    for &value in grid {
        let spec = template.with_tuned_value(value);
        let o = SolverOptions {
            warm_start: warm.take(),
            rescaled: false,
            ..opts.clone()
        };
        let mut f = fit_xy(x, y, names, &spec, &o)?;
        warm = Some(f.beta.values.clone());
        if opts.rescaled && spec.lambda2 > 0.0 {
            let factor = 1.0 + spec.lambda2;
            f.beta.values.iter_mut().for_each(|b| *b *= factor);
            let r = residuals(x, y, &f.beta.values);
            f.objective = r.dot(&r) + spec.penalty(&f.beta.values);
            f.residuals = r.to_vec();
        }
        out.push(f);
    }
    Ok(out)
}

pub fn fit_path(
    pr: &PartialResiduals,
    template: &PenaltySpec,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<FitResult>> {
    fit_path_xy(
        pr.x_tilde.view(),
        pr.y_tilde.view(),
        &pr.column_names,
        template,
        grid,
        opts,
    )
}

/// Smallest λ₁ at which the solution is identically zero:
/// `max_k |2 x̃_k'ỹ| / w_k`.
pub fn lambda_max_xy(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, spec: &PenaltySpec) -> f64 {
    // contiguous copies sum in the same order as the solver, so the first
    // grid point zeroes every coefficient exactly
    let y = y.to_owned();
    x.columns()
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let z = (2.0 * c.to_owned().dot(&y)).abs();
            let w = spec.weight(k);
            let v = z / w;
            if v * w < z {
                v.next_up()
            } else {
                v
            }
        })
        .fold(0.0, f64::max)
}

pub fn lambda_max(pr: &PartialResiduals, spec: &PenaltySpec) -> f64 {
    lambda_max_xy(pr.x_tilde.view(), pr.y_tilde.view(), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("x{j}")).collect()
    }

    fn toy() -> PartialResiduals {
        let x = array![
            [1.0, 0.5, -0.3],
            [-0.7, 1.2, 0.8],
            [0.3, -1.1, 0.4],
            [1.5, 0.2, -1.0],
            [-0.9, -0.4, 0.6],
            [0.2, 0.9, -0.2]
        ];
        let y = array![1.2, -0.4, 0.9, 2.1, -1.5, 0.3];
        PartialResiduals::from_linear(x, y, names(3)).unwrap()
    }

    #[test]
    fn objective_at_zero_is_rss() {
        let pr = toy();
        let z = CoefficientVector::unnamed(vec![0.0; 3]);
        let v = objective(&z, &pr, &PenaltySpec::enet(1.0, 1.0)).unwrap();
        assert!((v - pr.y_tilde.dot(&pr.y_tilde)).abs() < 1e-14);
    }

    #[test]
    fn objective_perfect_fit() {
        let x = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]];
        let b = [2.0, -1.0];
        let y = x.dot(&ArrayView1::from(&b[..]));
        let v = objective_xy(&b, x.view(), y.view(), &PenaltySpec::ols()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn objective_dimension_mismatch() {
        let pr = toy();
        let b = CoefficientVector::unnamed(vec![0.0; 2]);
        assert!(matches!(
            objective(&b, &pr, &PenaltySpec::ols()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn zero_above_lambda_max() {
        let pr = toy();
        let lm = lambda_max(&pr, &PenaltySpec::lasso(0.0));
        let f = fit(&pr, &PenaltySpec::enet(lm, 0.5), &SolverOptions::default()).unwrap();
        assert!(f.converged);
        assert!(f.beta.values.iter().all(|&b| b == 0.0));
        let f = fit(&pr, &PenaltySpec::lasso(lm * 0.9), &SolverOptions::default()).unwrap();
        assert!(f.beta.nonzero_count() > 0);
    }

    #[test]
    fn single_predictor_lambda_max() {
        // x'y = 3 → λ_max = 6
        let x = array![[1.0], [1.0], [1.0]];
        let y = array![1.0, 1.0, 1.0];
        assert_eq!(lambda_max_xy(x.view(), y.view(), &PenaltySpec::lasso(0.0)), 6.0);
    }

    #[test]
    fn unpenalized_matches_normal_equations() {
        let pr = toy();
        let f = fit(&pr, &PenaltySpec::ols(), &SolverOptions::default()).unwrap();
        assert!(f.converged);
        let g = pr.x_tilde.t().dot(&Array1::from(f.residuals.clone()));
        assert!(g.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn duplicate_columns_get_equal_coefficients() {
        let mut x = Array2::zeros((8, 3));
        for i in 0..8 {
            let a = (i as f64 * 0.7).sin();
            let b = (i as f64 * 1.3).cos();
            x[[i, 0]] = a;
            x[[i, 1]] = b;
            x[[i, 2]] = b;
        }
        let y = x.column(0).mapv(|v| 2.0 * v) + x.column(1).mapv(|v| 3.0 * v);
        let f = fit_xy(x.view(), y.view(), &names(3), &PenaltySpec::enet(0.1, 1.0 / 3.0), &SolverOptions::default())
            .unwrap();
        assert!(f.converged);
        assert_eq!(f.beta.values[1], f.beta.values[2]);
        assert!(f.notes.is_empty());

        let f = fit_xy(x.view(), y.view(), &names(3), &PenaltySpec::lasso(0.1), &SolverOptions::default()).unwrap();
        assert_eq!(f.notes.len(), 1);
    }

    #[test]
    fn rescaled_variant() {
        let pr = toy();
        let naive = fit(&pr, &PenaltySpec::enet(0.5, 2.0), &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            rescaled: true,
            ..SolverOptions::default()
        };
        let scaled = fit(&pr, &PenaltySpec::enet(0.5, 2.0), &opts).unwrap();
        for (a, b) in naive.beta.values.iter().zip(&scaled.beta.values) {
            assert!((3.0 * a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn options_validated() {
        let pr = toy();
        let bad = SolverOptions {
            tolerance: 0.0,
            ..SolverOptions::default()
        };
        assert!(fit(&pr, &PenaltySpec::ols(), &bad).is_err());
        let bad = SolverOptions {
            max_iterations: 0,
            ..SolverOptions::default()
        };
        assert!(fit(&pr, &PenaltySpec::ols(), &bad).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let pr = toy();
        let opts = SolverOptions {
            max_iterations: 1,
            ..SolverOptions::default()
        };
        let f = fit(&pr, &PenaltySpec::enet(0.01, 0.01), &opts).unwrap();
        assert!(!f.converged);
        assert_eq!(f.iterations, 1);
    }

    #[test]
    fn objective_never_increases() {
        let pr = toy();
        let opts = SolverOptions {
            record_trace: true,
            ..SolverOptions::default()
        };
        let f = fit(&pr, &PenaltySpec::enet(0.2, 0.3), &opts).unwrap();
        for w in f.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
    }
}
