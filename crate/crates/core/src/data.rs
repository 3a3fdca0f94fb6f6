//! Numeric containers, standardization and CSV ingestion.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations `(y, t, x)` of a partially linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Array1<f64>,
    t: Array1<f64>,
    x: Array2<f64>,
    response_name: String,
    covariate_name: String,
    column_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with default role names `y` and `t`.
    pub fn new(
        y: Array1<f64>,
        t: Array1<f64>,
        x: Array2<f64>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        Self::with_roles(y, t, x, "y".into(), "t".into(), column_names)
    }

    pub fn with_roles(
        y: Array1<f64>,
        t: Array1<f64>,
        x: Array2<f64>,
        response_name: String,
        covariate_name: String,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
        }
        if t.len() != n || x.nrows() != n {
            return Err(Error::Dimension(format!(
                "y has {n} rows, t has {}, x has {}",
                t.len(),
                x.nrows()
            )));
        }
        if x.ncols() == 0 {
            return Err(Error::Dimension("design has no predictor columns".into()));
        }
        if column_names.len() != x.ncols() {
            return Err(Error::Dimension(format!(
                "{} column names for {} predictors",
                column_names.len(),
                x.ncols()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(non_finite(i, &response_name));
        }
        if let Some(i) = t.iter().position(|v| !v.is_finite()) {
            return Err(non_finite(i, &covariate_name));
        }
        for ((i, j), v) in x.indexed_iter() {
            if !v.is_finite() {
                return Err(non_finite(i, &column_names[j]));
            }
        }
        Ok(Dataset {
            y,
            t,
            x,
            response_name,
            covariate_name,
            column_names,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn t(&self) -> ArrayView1<'_, f64> {
        self.t.view()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn covariate_name(&self) -> &str {
        &self.covariate_name
    }

    /// Index of a predictor by name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Subset of rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        Dataset::with_roles(
            self.y.select(Axis(0), rows),
            self.t.select(Axis(0), rows),
            self.x.select(Axis(0), rows),
            self.response_name.clone(),
            self.covariate_name.clone(),
            self.column_names.clone(),
        )
    }
}

fn non_finite(row: usize, column: &str) -> Error {
    Error::Ingestion {
        row: row + 1,
        column: column.to_string(),
        message: "non-finite value".into(),
    }
}

/// Which CSV columns play which role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub response: String,
    pub covariate: String,
    /// Explicit predictor list; `None` means every remaining column.
    pub predictors: Option<Vec<String>>,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        ColumnRoles {
            response: "y".into(),
            covariate: "t".into(),
            predictors: None,
        }
    }
}

/// Reads a headed CSV file into a [`Dataset`].
pub fn load_csv(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, roles)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(reader: R, roles: &ColumnRoles) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let yi = find(&roles.response)?;
    let ti = find(&roles.covariate)?;
    if yi == ti {
        return Err(Error::Schema("response and covariate must be different columns".into()));
    }
    let predictors: Vec<usize> = match &roles.predictors {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&j| j != yi && j != ti).collect(),
    };
    if predictors.is_empty() {
        return Err(Error::Schema("no predictor columns".into()));
    }
    if predictors.iter().any(|&j| j == yi || j == ti) {
        return Err(Error::Schema("a predictor column duplicates the response or covariate".into()));
    }

    let mut y = Vec::new();
    let mut t = Vec::new();
    let mut x = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let cell = |j: usize| -> Result<f64> {
            let raw = record.get(j).ok_or_else(|| Error::Ingestion {
                row,
                column: header[j].clone(),
                message: "missing field".into(),
            })?;
            let v: f64 = raw.parse().map_err(|_| Error::Ingestion {
                row,
                column: header[j].clone(),
                message: format!("cannot parse `{raw}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingestion {
                    row,
                    column: header[j].clone(),
                    message: format!("non-finite value `{raw}`"),
                });
            }
            Ok(v)
        };
        y.push(cell(yi)?);
        t.push(cell(ti)?);
        for &j in &predictors {
            x.push(cell(j)?);
        }
    }
    let n = y.len();
    let p = predictors.len();
    let x = Array2::from_shape_vec((n, p), x).expect("row-major buffer matches shape");
    Dataset::with_roles(
        Array1::from(y),
        Array1::from(t),
        x,
        header[yi].clone(),
        header[ti].clone(),
        predictors.iter().map(|&j| header[j].clone()).collect(),
    )
}

/// Formats a value with 17 significant digits so it parses back bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `d` as CSV: response, covariate, then predictors.
pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(d, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<W: Write>(d: &Dataset, w: &mut W) -> std::io::Result<()> {
    let mut header = vec![d.response_name.clone(), d.covariate_name.clone()];
    header.extend(d.column_names.iter().cloned());
    writeln!(w, "{}", header.join(","))?;
    for i in 0..d.n() {
        let mut row = vec![fmt_f64(d.y[i]), fmt_f64(d.t[i])];
        row.extend(d.x.row(i).iter().map(|&v| fmt_f64(v)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Record of the centring and scaling applied by [`standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationInfo {
    pub y_mean: f64,
    pub x_means: Vec<f64>,
    pub x_scales: Vec<f64>,
    pub applied: bool,
}

impl StandardizationInfo {
    /// The no-op record used when standardization is switched off.
    pub fn identity(p: usize) -> Self {
        StandardizationInfo {
            y_mean: 0.0,
            x_means: vec![0.0; p],
            x_scales: vec![1.0; p],
            applied: false,
        }
    }
}

/// Centres `y` and scales each design column to mean 0 and sample standard
/// deviation 1 (divisor `n − 1`).
pub fn standardize(d: &Dataset) -> Result<(Dataset, StandardizationInfo)> {
    let n = d.n() as f64;
    let y_mean = d.y.sum() / n;
    let mut x = d.x.clone();
    let mut means = Vec::with_capacity(d.p());
    let mut scales = Vec::with_capacity(d.p());
    for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
        let sd = (ss / (n - 1.0)).sqrt();
        // Rounding leaves a few ulps of spread in a numerically constant column.
        if !(sd > 64.0 * f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateColumn(d.column_names[j].clone()));
        }
        col.mapv_inplace(|v| (v - mean) / sd);
        means.push(mean);
        scales.push(sd);
    }
    let y = d.y.mapv(|v| v - y_mean);
    let out = Dataset {
        y,
        t: d.t.clone(),
        x,
        response_name: d.response_name.clone(),
        covariate_name: d.covariate_name.clone(),
        column_names: d.column_names.clone(),
    };
    Ok((
        out,
        StandardizationInfo {
            y_mean,
            x_means: means,
            x_scales: scales,
            applied: true,
        },
    ))
}

/// Applies a recorded centring and scaling to new data with the same
/// columns (for example a held-out file).
pub fn apply_standardization(d: &Dataset, info: &StandardizationInfo) -> Result<Dataset> {
    if info.x_means.len() != d.p() || info.x_scales.len() != d.p() {
        return Err(Error::Dimension(format!(
            "standardization record has {} columns, data has {}",
            info.x_means.len(),
            d.p()
        )));
    }
    if !info.applied {
        return Ok(d.clone());
    }
    let mut x = d.x.clone();
    for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
        let (m, s) = (info.x_means[j], info.x_scales[j]);
        col.mapv_inplace(|v| (v - m) / s);
    }
    Ok(Dataset {
        y: d.y.mapv(|v| v - info.y_mean),
        x,
        ..d.clone()
    })
}

/// Named coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if values.len() != names.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients with {} names",
                values.len(),
                names.len()
            )));
        }
        Ok(CoefficientVector { values, names })
    }

    /// Coefficients named `x1..xp`.
    pub fn unnamed(values: Vec<f64>) -> Self {
        let names = (1..=values.len()).map(|j| format!("x{j}")).collect();
        CoefficientVector { values, names }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn view(&self) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[..])
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

/// Coefficients mapped back to the raw data scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalScale {
    pub coefficients: CoefficientVector,
    /// `y_mean − Σ β_j · x_mean_j`.
    pub offset: f64,
}

/// Maps standardized-scale coefficients back to the raw scale:
/// `β_orig[j] = β_std[j] / scale[j]`.
pub fn unstandardize_coefficients(
    beta: &CoefficientVector,
    info: &StandardizationInfo,
) -> Result<OriginalScale> {
    if beta.len() != info.x_scales.len() || beta.len() != info.x_means.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} standardized columns",
            beta.len(),
            info.x_scales.len()
        )));
    }
    if !info.applied {
        return Ok(OriginalScale {
            coefficients: beta.clone(),
            offset: info.y_mean,
        });
    }
    let values: Vec<f64> = beta
        .values
        .iter()
        .zip(&info.x_scales)
        .map(|(b, s)| b / s)
        .collect();
    let offset = info.y_mean
        - values
            .iter()
            .zip(&info.x_means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok(OriginalScale {
        coefficients: CoefficientVector {
            values,
            names: beta.names.clone(),
        },
        offset,
    })
}
