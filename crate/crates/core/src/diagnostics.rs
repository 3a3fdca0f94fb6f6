//! Group-effect bound, stationarity certification and estimation error.
//!
//! For an elastic net fit with `λ₂ > 0` and two coefficients of the same
//! sign, the gap `D(k, l) = |β̂_k − β̂_l|` satisfies
//!
//! ```text
//! D(k, l) ≤ (2m / λ₂) Σᵢ |r̂ᵢ|,   m = maxᵢ |x_ik − x_il|
//! ```
//!
//! where `m` is taken over the (standardized) design before smoothing and
//! `r̂` are the in-sample residuals of the fit on the partial residuals.

use ndarray::{Array1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::CoefficientVector;
use crate::error::{Error, Result};
use crate::smoothing::PartialResiduals;
use crate::solver::{FitResult, PenaltySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEffectReport {
    pub pair: (usize, usize),
    pub d_value: f64,
    pub m_value: f64,
    pub bound: f64,
    /// `β̂_k β̂_l > 0`, the hypothesis under which the bound is guaranteed.
    pub sign_condition_met: bool,
    pub residual_l1: f64,
    /// Computed against `−x_k` (and `−β̂_k`).
    pub flipped: bool,
}

impl GroupEffectReport {
    /// `D ≤ bound`, up to `slack`.
    pub fn satisfied(&self, slack: f64) -> bool {
        self.d_value <= self.bound + slack
    }
}

fn check_pair(p: usize, (k, l): (usize, usize)) -> Result<()> {
    if k == l {
        return Err(Error::Config(format!("group-effect pair needs distinct columns, got ({k}, {l})")));
    }
    if k >= p || l >= p {
        return Err(Error::Dimension(format!("pair ({k}, {l}) out of range for {p} columns")));
    }
    Ok(())
}

fn report(
    beta: &[f64],
    residual_l1: f64,
    raw_x: ArrayView2<'_, f64>,
    (k, l): (usize, usize),
    lambda2: f64,
    flip: bool,
) -> GroupEffectReport {
    let sk = if flip { -1.0 } else { 1.0 };
    let bk = sk * beta[k];
    let bl = beta[l];
    let m_value = raw_x
        .rows()
        .into_iter()
        .map(|row| (sk * row[k] - row[l]).abs())
        .fold(0.0, f64::max);
    GroupEffectReport {
        pair: (k, l),
        d_value: (bk - bl).abs(),
        m_value,
        bound: 2.0 * m_value * residual_l1 / lambda2,
        sign_condition_met: bk * bl > 0.0,
        residual_l1,
        flipped: flip,
    }
}

/// Group-effect quantities for the pair `(k, l)` (0-based).
///
/// `raw_x` is the design before smoothing, on the scale the fit used.
pub fn group_effect(
    fit: &FitResult,
    raw_x: ArrayView2<'_, f64>,
    pair: (usize, usize),
    lambda2: f64,
) -> Result<GroupEffectReport> {
    if !(lambda2 > 0.0) {
        return Err(Error::BoundUndefined(format!("lambda2 must be positive, got {lambda2}")));
    }
    let p = fit.beta.len();
    if raw_x.ncols() != p {
        return Err(Error::Dimension(format!(
            "design has {} columns, fit has {p}",
            raw_x.ncols()
        )));
    }
    if raw_x.nrows() != fit.residuals.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows, fit has {} residuals",
            raw_x.nrows(),
            fit.residuals.len()
        )));
    }
    check_pair(p, pair)?;
    let residual_l1 = fit.residuals.iter().map(|r| r.abs()).sum();
    Ok(report(&fit.beta.values, residual_l1, raw_x, pair, lambda2, false))
}

/// [`group_effect`], plus a second report against `−x_k` when the
/// coefficients have opposite signs.
pub fn group_effect_with_flip(
    fit: &FitResult,
    raw_x: ArrayView2<'_, f64>,
    pair: (usize, usize),
    lambda2: f64,
) -> Result<(GroupEffectReport, Option<GroupEffectReport>)> {
    let primary = group_effect(fit, raw_x, pair, lambda2)?;
    let (k, l) = pair;
    let flipped = (fit.beta.values[k] * fit.beta.values[l] < 0.0).then(|| {
        report(&fit.beta.values, primary.residual_l1, raw_x, pair, lambda2, true)
    });
    Ok((primary, flipped))
}

/// Reports for every pair `k < l`.
pub fn group_effect_all(
    fit: &FitResult,
    raw_x: ArrayView2<'_, f64>,
    lambda2: f64,
) -> Result<Vec<GroupEffectReport>> {
    let p = fit.beta.len();
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|k| (k + 1..p).map(move |l| (k, l)))
        .collect();
    pairs
        .into_par_iter()
        .map(|pair| group_effect(fit, raw_x, pair, lambda2))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub max_violation: f64,
    pub pass: bool,
    /// Per-coordinate violation.
    pub violations: Vec<f64>,
}

/// Subgradient stationarity of the fit.
///
/// Active coordinates: `|−2 x̃_k'ỹ + 2 x̃_k'X̃β̂ + λ₁w_k sgn(β̂_k) + 2λ₂β̂_k|`.
/// Inactive coordinates: `max(0, |2 x̃_k'r̂| − λ₁w_k)`.
pub fn kkt_check(
    beta: &CoefficientVector,
    pr: &PartialResiduals,
    spec: &PenaltySpec,
    tol: f64,
) -> Result<KktReport> {
    let p = pr.p();
    if beta.len() != p {
        return Err(Error::Dimension(format!("{} coefficients for {p} columns", beta.len())));
    }
    let b = Array1::from(beta.values.clone());
    let fitted = pr.x_tilde.dot(&b);
    let violations: Vec<f64> = (0..p)
        .map(|k| {
            let col = pr.x_tilde.column(k);
            let g = -2.0 * col.dot(&pr.y_tilde) + 2.0 * col.dot(&fitted);
            let l1 = spec.lambda1 * spec.weight(k);
            let bk = b[k];
            if bk != 0.0 {
                (g + l1 * bk.signum() + 2.0 * spec.lambda2 * bk).abs()
            } else {
                (g.abs() - l1).max(0.0)
            }
        })
        .collect();
    let max_violation = violations.iter().copied().fold(0.0, f64::max);
    Ok(KktReport {
        max_violation,
        pass: max_violation <= tol,
        violations,
    })
}

/// `‖β̂ − β‖²`.
pub fn mse(beta_hat: &CoefficientVector, beta_true: &CoefficientVector) -> Result<f64> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::Dimension(format!(
            "{} estimated vs {} true coefficients",
            beta_hat.len(),
            beta_true.len()
        )));
    }
    Ok(beta_hat
        .values
        .iter()
        .zip(&beta_true.values)
        .map(|(a, b)| (a - b).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{fit, lambda_max, SolverOptions};
    use ndarray::{array, Array2};

    fn fake_fit(beta: Vec<f64>, residuals: Vec<f64>) -> FitResult {
        FitResult {
            beta: CoefficientVector::unnamed(beta),
            residuals,
            objective: 0.0,
            iterations: 0,
            converged: true,
            dual_gap_proxy: 0.0,
            trace: vec![],
            notes: vec![],
        }
    }

    #[test]
    fn identical_columns_have_zero_bound() {
        let x = array![[1.0, 0.5, 0.5], [-1.0, 2.0, 2.0], [0.0, -2.5, -2.5]];
        let f = fake_fit(vec![0.3, 0.7, 0.7], vec![0.1, -0.2, 0.1]);
        let r = group_effect(&f, x.view(), (1, 2), 1.0 / 3.0).unwrap();
        assert_eq!(r.m_value, 0.0);
        assert_eq!(r.bound, 0.0);
        assert_eq!(r.d_value, 0.0);
        assert!(r.sign_condition_met);
        assert!(r.satisfied(0.0));
    }

    #[test]
    fn equal_coefficients_zero_gap() {
        let x = array![[1.0, -1.0], [0.0, 3.0]];
        let f = fake_fit(vec![0.4, 0.4], vec![1.0, -2.0]);
        let r = group_effect(&f, x.view(), (0, 1), 2.0).unwrap();
        assert_eq!(r.d_value, 0.0);
        assert_eq!(r.m_value, 3.0);
        assert_eq!(r.residual_l1, 3.0);
        assert_eq!(r.bound, 2.0 * 3.0 * 3.0 / 2.0);
    }

    #[test]
    fn symmetric_in_pair() {
        let x = array![[1.0, -1.0, 0.2], [0.0, 3.0, -0.4], [2.0, 0.5, 0.1]];
        let f = fake_fit(vec![0.4, -0.1, 0.9], vec![1.0, -2.0, 0.5]);
        for (k, l) in [(0, 1), (0, 2), (1, 2)] {
            let a = group_effect(&f, x.view(), (k, l), 0.5).unwrap();
            let b = group_effect(&f, x.view(), (l, k), 0.5).unwrap();
            assert_eq!((a.d_value, a.m_value, a.bound), (b.d_value, b.m_value, b.bound));
        }
    }

    #[test]
    fn flip_for_opposite_signs() {
        let x = array![[1.0, -1.0], [2.0, -2.0]];
        let f = fake_fit(vec![0.5, -0.5], vec![0.1, 0.1]);
        let (p, fl) = group_effect_with_flip(&f, x.view(), (0, 1), 1.0).unwrap();
        assert!(!p.sign_condition_met);
        let fl = fl.unwrap();
        assert!(fl.flipped && fl.sign_condition_met);
        assert_eq!(fl.m_value, 0.0);
        assert_eq!(fl.d_value, 0.0);
        let g = fake_fit(vec![0.5, 0.5], vec![0.1, 0.1]);
        assert!(group_effect_with_flip(&g, x.view(), (0, 1), 1.0).unwrap().1.is_none());
    }

    #[test]
    fn zero_lambda2_is_undefined() {
        let x = array![[1.0, 2.0]];
        let f = fake_fit(vec![1.0, 1.0], vec![0.0]);
        assert!(matches!(
            group_effect(&f, x.view(), (0, 1), 0.0),
            Err(Error::BoundUndefined(_))
        ));
        assert!(group_effect(&f, x.view(), (0, 0), 1.0).is_err());
        assert!(group_effect(&f, x.view(), (0, 5), 1.0).is_err());
    }

    fn toy() -> PartialResiduals {
        let x = array![
            [1.0, 0.5, -0.3],
            [-0.7, 1.2, 0.8],
            [0.3, -1.1, 0.4],
            [1.5, 0.2, -1.0],
            [-0.9, -0.4, 0.6]
        ];
        let y = array![1.2, -0.4, 0.9, 2.1, -1.5];
        PartialResiduals::from_linear(x, y, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn zero_solution_above_lambda_max_passes() {
        let pr = toy();
        let lm = lambda_max(&pr, &PenaltySpec::lasso(0.0));
        let spec = PenaltySpec::enet(lm, 0.3);
        let z = CoefficientVector::unnamed(vec![0.0; 3]);
        assert!(kkt_check(&z, &pr, &spec, 1e-10).unwrap().pass);
    }

    #[test]
    fn ols_normal_equations() {
        let pr = toy();
        let f = fit(&pr, &PenaltySpec::ols(), &SolverOptions::default()).unwrap();
        let r = kkt_check(&f.beta, &pr, &PenaltySpec::ols(), 1e-7).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn perturbation_fails() {
        let pr = toy();
        let spec = PenaltySpec::enet(0.5, 0.2);
        let f = fit(&pr, &spec, &SolverOptions::default()).unwrap();
        for k in 0..3 {
            let mut b = f.beta.clone();
            b.values[k] += 0.01;
            let r = kkt_check(&b, &pr, &spec, 1e-6).unwrap();
            assert!(!r.pass);
            let ss: f64 = pr.x_tilde.column(k).iter().map(|v| v * v).sum();
            assert!(r.violations[k] >= 2.0 * (ss + spec.lambda2) * 0.01 - 1e-7);
        }
    }

    #[test]
    fn mse_cases() {
        let b = CoefficientVector::unnamed(vec![-2.0, 1.0, 1.0]);
        assert_eq!(mse(&b, &b).unwrap(), 0.0);
        let mut c = b.clone();
        c.values[0] += 1.0;
        assert_eq!(mse(&c, &b).unwrap(), 1.0);
        assert!(mse(&CoefficientVector::unnamed(vec![1.0]), &b).is_err());
    }

    #[test]
    fn all_pairs() {
        let x = Array2::from_shape_fn((4, 4), |(i, j)| (i * 3 + j) as f64);
        let f = fake_fit(vec![1.0; 4], vec![0.5; 4]);
        assert_eq!(group_effect_all(&f, x.view(), 1.0).unwrap().len(), 6);
    }
}
