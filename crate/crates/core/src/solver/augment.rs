use ndarray::{s, Array1, Array2};

use super::{fit_xy, PenaltySpec, SolverOptions};
use crate::error::{Error, Result};
use crate::smoothing::PartialResiduals;

/// The elastic net problem rewritten as a lasso on `n + p` rows:
///
/// ```text
/// X* = s · [X̃; √λ₂ I],   y* = [ỹ; 0],   λ* = s · λ₁,   s = (1 + λ₂)^(−1/2)
/// ```
///
/// whose lasso solution `γ̂` gives the elastic net minimizer as `β̂ = s · γ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedProblem {
    pub x_star: Array2<f64>,
    pub y_star: Array1<f64>,
    pub scale: f64,
    pub lambda_star: f64,
    pub column_names: Vec<String>,
}

pub fn augment_to_lasso(pr: &PartialResiduals, lambda2: f64, lambda1: f64) -> Result<AugmentedProblem> {
    if !(lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(Error::Penalty(format!("lambda2 must be finite and ≥ 0, got {lambda2}")));
    }
    if !(lambda1 >= 0.0 && lambda1.is_finite()) {
        return Err(Error::Penalty(format!("lambda1 must be finite and ≥ 0, got {lambda1}")));
    }
    let (n, p) = pr.x_tilde.dim();
    let scale = (1.0 + lambda2).powf(-0.5);
    let mut x_star = Array2::zeros((n + p, p));
    x_star
        .slice_mut(s![..n, ..])
        .assign(&pr.x_tilde.mapv(|v| scale * v));
    let diag = scale * lambda2.sqrt();
    for j in 0..p {
        x_star[[n + j, j]] = diag;
    }
    let mut y_star = Array1::zeros(n + p);
    y_star.slice_mut(s![..n]).assign(&pr.y_tilde);
    Ok(AugmentedProblem {
        x_star,
        y_star,
        scale,
        lambda_star: lambda1 * scale,
        column_names: pr.column_names.clone(),
    })
}

impl AugmentedProblem {
    /// Solves the lasso on the augmented data and maps back to `β̂`.
    pub fn solve(&self, opts: &SolverOptions) -> Result<Vec<f64>> {
        let f = fit_xy(
            self.x_star.view(),
            self.y_star.view(),
            &self.column_names,
            &PenaltySpec::lasso(self.lambda_star),
            opts,
        )?;
        Ok(f.beta.values.iter().map(|g| self.scale * g).collect())
    }
}
