use serde::{Deserialize, Serialize};

use super::{fit, fit_ridge_closed_form, FitResult, PenaltySpec, SolverOptions};
use crate::error::Result;
use crate::smoothing::PartialResiduals;

/// Guard added to `|β̂_init|` before inversion.
pub const WEIGHT_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlassoOptions {
    pub gamma: f64,
    /// Ridge penalty of the initial estimator; `None` means `1e-3 · n`.
    pub init_lambda2: Option<f64>,
}

impl Default for AlassoOptions {
    fn default() -> Self {
        AlassoOptions {
            gamma: 1.0,
            init_lambda2: None,
        }
    }
}

/// `w_j = 1 / (|β̂_init,j| + 1e-6)^γ` from a ridge initial fit.
pub fn adaptive_weights(pr: &PartialResiduals, opts: &AlassoOptions) -> Result<Vec<f64>> {
    let lambda = opts.init_lambda2.unwrap_or(1e-3 * pr.n() as f64);
    let init = fit_ridge_closed_form(pr, lambda)?;
    Ok(init
        .beta
        .values
        .iter()
        .map(|b| (b.abs() + WEIGHT_GUARD).powf(-opts.gamma))
        .collect())
}

/// Adaptive lasso: ridge-initialized weights, then a weighted-ℓ₁ fit.
pub fn fit_alasso(
    pr: &PartialResiduals,
    lambda1: f64,
    alasso: &AlassoOptions,
    opts: &SolverOptions,
) -> Result<FitResult> {
    let w = adaptive_weights(pr, alasso)?;
    fit(pr, &PenaltySpec::alasso(lambda1, w, alasso.gamma), opts)
}
