//! Nadaraya-Watson smoothing in the scalar covariate `t` and the partial
//! residuals `ỹ = y − m̂_Y(t)`, `X̃ = X − m̂_X(t)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `K(u) = 1/2` on `|u| ≤ 1`.
    Box,
    /// `K(u) = 3/4 (1 − u²)` on `|u| ≤ 1`.
    Epanechnikov,
    /// Standard normal density.
    Gaussian,
}

impl Kernel {
    #[inline]
    pub fn weight(self, u: f64) -> f64 {
        match self {
            Kernel::Box => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            Kernel::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            Kernel::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "box" | "boxcar" | "uniform" => Ok(Kernel::Box),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            "gaussian" | "normal" => Ok(Kernel::Gaussian),
            other => Err(Error::Config(format!("unknown kernel `{other}`"))),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Box => "box",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Gaussian => "gaussian",
        })
    }
}

/// Kernel, bandwidth and evaluation mode of the smoother.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmootherConfig {
    pub kernel: Kernel,
    /// Resolved bandwidth `h`.
    pub bandwidth: f64,
    /// The constant `c` when `h = c · n^(−1/5)`; `None` for a fixed `h`.
    pub bandwidth_constant: Option<f64>,
    /// Exclude the evaluation point from its own average. Diagnostics only.
    #[serde(default)]
    pub leave_one_out: bool,
}

impl SmootherConfig {
    pub fn fixed(kernel: Kernel, bandwidth: f64) -> Result<Self> {
        let cfg = SmootherConfig {
            kernel,
            bandwidth,
            bandwidth_constant: None,
            leave_one_out: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `h = c · n^(−1/5)`.
    pub fn rule_of_thumb(kernel: Kernel, n: usize, c: f64) -> Result<Self> {
        Ok(SmootherConfig {
            kernel,
            bandwidth: default_bandwidth(n, c)?,
            bandwidth_constant: Some(c),
            leave_one_out: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::Config(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// Rate-optimal bandwidth order for a univariate smoother: `c · n^(−1/5)`.
pub fn default_bandwidth(n: usize, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Config(format!("bandwidth rule needs n ≥ 2, got {n}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("bandwidth constant must be positive, got {c}")));
    }
    Ok(c * (n as f64).powf(-0.2))
}

// Below this many evaluation points the rayon fan-out costs more than it saves.
const PAR_THRESHOLD: usize = 256;

/// Smooths each column of `values` against `t`, evaluating at the sample
/// points themselves.
///
/// Fitted value at `t_j` is `Σᵢ K((tᵢ − t_j)/h) vᵢ / Σᵢ K((tᵢ − t_j)/h)`,
/// computed as `v_j + Σᵢ wᵢ (vᵢ − v_j) / Σᵢ wᵢ` so that constant columns are
/// reproduced exactly.
pub fn nw_smooth(
    values: ArrayView2<'_, f64>,
    t: ArrayView1<'_, f64>,
    config: &SmootherConfig,
) -> Result<Array2<f64>> {
    let (fitted, _) = smooth_deviations(values, t, config)?;
    Ok(fitted)
}

/// Vector form of [`nw_smooth`].
pub fn nw_smooth_vec(
    values: ArrayView1<'_, f64>,
    t: ArrayView1<'_, f64>,
    config: &SmootherConfig,
) -> Result<Array1<f64>> {
    let m = values.insert_axis(Axis(1));
    Ok(nw_smooth(m, t, config)?.column(0).to_owned())
}

/// Returns `(m̂, v − m̂)`; the residual is formed from the weighted
/// deviations directly instead of by subtraction.
fn smooth_deviations(
    values: ArrayView2<'_, f64>,
    t: ArrayView1<'_, f64>,
    config: &SmootherConfig,
) -> Result<(Array2<f64>, Array2<f64>)> {
    config.validate()?;
    let n = t.len();
    if values.nrows() != n {
        return Err(Error::Dimension(format!(
            "{} values for {} covariate points",
            values.nrows(),
            n
        )));
    }
    let q = values.ncols();
    let h = config.bandwidth;
    let kernel = config.kernel;
    let loo = config.leave_one_out;

    let row = |j: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let tj = t[j];
        let vj = values.row(j);
        let mut wsum = 0.0;
        let mut acc = vec![0.0; q];
        for i in 0..n {
            if loo && i == j {
                continue;
            }
            let w = kernel.weight((t[i] - tj) / h);
            if w == 0.0 {
                continue;
            }
            wsum += w;
            for (a, (vi, vj)) in acc.iter_mut().zip(values.row(i).iter().zip(vj.iter())) {
                *a += w * (vi - vj);
            }
        }
        if !(wsum > 0.0) {
            return Err(Error::EmptyNeighborhood { index: j, t: tj });
        }
        let dev: Vec<f64> = acc.iter().map(|a| a / wsum).collect();
        let fitted = vj.iter().zip(&dev).map(|(v, d)| v + d).collect();
        let resid = dev.iter().map(|d| -d).collect();
        Ok((fitted, resid))
    };

    let rows: Vec<(Vec<f64>, Vec<f64>)> = if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(row).collect::<Result<_>>()?
    } else {
        (0..n).map(row).collect::<Result<_>>()?
    };

    let mut fitted = Array2::zeros((n, q));
    let mut resid = Array2::zeros((n, q));
    for (j, (f, r)) in rows.into_iter().enumerate() {
        fitted.row_mut(j).assign(&ArrayView1::from(&f[..]));
        resid.row_mut(j).assign(&ArrayView1::from(&r[..]));
    }
    Ok((fitted, resid))
}

/// Off-sample smoothing: averages of `values` (observed at `t_train`)
/// evaluated at `t_eval`.
///
/// Points whose kernel neighbourhood contains no training point get the
/// training global mean; their indices are returned alongside.
pub fn nw_smooth_at(
    values: ArrayView2<'_, f64>,
    t_train: ArrayView1<'_, f64>,
    t_eval: ArrayView1<'_, f64>,
    config: &SmootherConfig,
) -> Result<(Array2<f64>, Vec<usize>)> {
    config.validate()?;
    if values.nrows() != t_train.len() {
        return Err(Error::Dimension(format!(
            "{} values for {} training points",
            values.nrows(),
            t_train.len()
        )));
    }
    let q = values.ncols();
    let h = config.bandwidth;
    let global = values
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::Dimension("no training points".into()))?;
    let mut out = Array2::zeros((t_eval.len(), q));
    let mut fallback = Vec::new();
    for (j, &te) in t_eval.iter().enumerate() {
        let mut wsum = 0.0;
        let mut acc = Array1::<f64>::zeros(q);
        for (i, &ti) in t_train.iter().enumerate() {
            let w = config.kernel.weight((ti - te) / h);
            if w == 0.0 {
                continue;
            }
            wsum += w;
            Zip::from(&mut acc)
                .and(values.row(i))
                .for_each(|a, &v| *a += w * v);
        }
        if wsum > 0.0 {
            out.row_mut(j).assign(&(acc / wsum));
        } else {
            out.row_mut(j).assign(&global);
            fallback.push(j);
        }
    }
    Ok((out, fallback))
}

/// Kernel-residualized response and design.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialResiduals {
    pub x_tilde: Array2<f64>,
    pub y_tilde: Array1<f64>,
    pub mx_hat: Array2<f64>,
    pub my_hat: Array1<f64>,
    pub config: SmootherConfig,
    pub column_names: Vec<String>,
}

impl PartialResiduals {
    /// Wraps an already-linear problem (no smoothing step).
    pub fn from_linear(
        x: Array2<f64>,
        y: Array1<f64>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Dimension(format!(
                "design has {} rows, response has {}",
                x.nrows(),
                y.len()
            )));
        }
        if column_names.len() != x.ncols() {
            return Err(Error::Dimension("column names do not match design".into()));
        }
        let (n, p) = x.dim();
        Ok(PartialResiduals {
            mx_hat: Array2::zeros((n, p)),
            my_hat: Array1::zeros(n),
            x_tilde: x,
            y_tilde: y,
            config: SmootherConfig {
                kernel: Kernel::Box,
                bandwidth: f64::INFINITY,
                bandwidth_constant: None,
                leave_one_out: false,
            },
            column_names,
        })
    }

    pub fn n(&self) -> usize {
        self.y_tilde.len()
    }

    pub fn p(&self) -> usize {
        self.x_tilde.ncols()
    }
}

/// Removes the conditional means in `t` from `y` and every design column.
pub fn partial_out(d: &Dataset, config: &SmootherConfig) -> Result<PartialResiduals> {
    let (n, p) = (d.n(), d.p());
    let mut joint = Array2::zeros((n, p + 1));
    joint.column_mut(0).assign(&d.y());
    joint.slice_mut(ndarray::s![.., 1..]).assign(&d.x());
    let (fitted, resid) = smooth_deviations(joint.view(), d.t(), config)?;
    Ok(PartialResiduals {
        x_tilde: resid.slice(ndarray::s![.., 1..]).to_owned(),
        y_tilde: resid.column(0).to_owned(),
        mx_hat: fitted.slice(ndarray::s![.., 1..]).to_owned(),
        my_hat: fitted.column(0).to_owned(),
        config: config.clone(),
        column_names: d.column_names().to_vec(),
    })
}
