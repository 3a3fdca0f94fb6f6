use nalgebra::{DMatrix, DVector};
use ndarray::{ArrayView1, ArrayView2};

use super::{residuals, FitResult, PenaltySpec};
use crate::data::CoefficientVector;
use crate::error::{Error, Result};
use crate::smoothing::PartialResiduals;

// Condition-number estimate above which a warning is attached to the fit.
const CONDITION_WARNING: f64 = 1e12;

/// `β̂ = (X'X + λ₂I)⁻¹ X'y` via a Cholesky factorization.
pub fn fit_ridge_xy(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    names: &[String],
    lambda2: f64,
) -> Result<FitResult> {
    if !(lambda2 > 0.0 && lambda2.is_finite()) {
        return Err(Error::Penalty(format!("closed-form ridge needs lambda2 > 0, got {lambda2}")));
    }
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::Dimension(format!("design has {n} rows, response has {}", y.len())));
    }
    if names.len() != p {
        return Err(Error::Dimension("column names do not match design".into()));
    }
    let xm = DMatrix::from_fn(n, p, |i, j| x[[i, j]]);
    let yv = DVector::from_iterator(n, y.iter().copied());
    let mut gram = xm.tr_mul(&xm);
    for j in 0..p {
        gram[(j, j)] += lambda2;
    }
    let rhs = xm.tr_mul(&yv);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("ridge system is not positive definite".into()))?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let cond = (hi / lo).powi(2);
    let beta: Vec<f64> = chol.solve(&rhs).iter().copied().collect();

    let mut notes = Vec::new();
    if cond > CONDITION_WARNING {
        notes.push(format!("ill-conditioned ridge system (condition estimate {cond:.3e})"));
    }
    let spec = PenaltySpec::ridge(lambda2);
    let r = residuals(x, y, &beta);
    let objective = r.dot(&r) + spec.penalty(&beta);
    // Stationarity of the smooth objective: 2X'r = 2λ₂β.
    let g = x.t().dot(&r);
    let violation = g
        .iter()
        .zip(&beta)
        .map(|(gk, b)| (2.0 * gk - 2.0 * lambda2 * b).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        beta: CoefficientVector::new(beta, names.to_vec())?,
        residuals: r.to_vec(),
        objective,
        iterations: 0,
        converged: true,
        dual_gap_proxy: violation,
        trace: Vec::new(),
        notes,
    })
}

pub fn fit_ridge_closed_form(pr: &PartialResiduals, lambda2: f64) -> Result<FitResult> {
    fit_ridge_xy(pr.x_tilde.view(), pr.y_tilde.view(), &pr.column_names, lambda2)
}
