//! Cyclic coordinate descent for `‖y − Xβ‖² + λ₂‖β‖² + Σ_k l1_k |β_k|`.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::SolverOptions;

/// `S(z, γ) = sign(z) · max(|z| − γ, 0)`.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub(crate) struct Outcome {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub max_violation: f64,
    pub trace: Vec<f64>,
    pub duplicate_groups: Vec<Vec<usize>>,
}

/// Groups of bitwise-identical columns (with identical ℓ₁ levels).
pub(crate) fn duplicate_groups(cols: &Array2<f64>, l1: &[f64]) -> Vec<Vec<usize>> {
    let mut seen: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for (k, col) in cols.outer_iter().enumerate() {
        let mut key: Vec<u64> = col.iter().map(|v| v.to_bits()).collect();
        key.push(l1[k].to_bits());
        seen.entry(key).or_default().push(k);
    }
    let mut groups: Vec<Vec<usize>> = seen.into_values().filter(|g| g.len() > 1).collect();
    groups.sort();
    groups
}

struct State<'a> {
    /// Columns of the design stored as rows (p × n, contiguous).
    cols: Array2<f64>,
    y: ArrayView1<'a, f64>,
    colsq: Vec<f64>,
    l1: &'a [f64],
    l2: f64,
    beta: Vec<f64>,
    r: Array1<f64>,
}

impl State<'_> {
    fn refresh_residual(&mut self) {
        let mut r = self.y.to_owned();
        for (k, col) in self.cols.outer_iter().enumerate() {
            let b = self.beta[k];
            if b != 0.0 {
                r.scaled_add(-b, &col);
            }
        }
        self.r = r;
    }

    /// Minimizes over coordinate `k`; returns the change in gradient units,
    /// `(2‖x_k‖² + 2λ₂) |Δβ_k|`.
    #[inline]
    fn update(&mut self, k: usize) -> f64 {
        let old = self.beta[k];
        let curvature = 2.0 * self.colsq[k] + 2.0 * self.l2;
        if self.colsq[k] == 0.0 {
            self.beta[k] = 0.0;
            return curvature * old.abs();
        }
        let col = self.cols.row(k);
        let rho = col.dot(&self.r) + self.colsq[k] * old;
        let new = soft_threshold(2.0 * rho, self.l1[k]) / curvature;
        let delta = new - old;
        if delta != 0.0 {
            self.r.scaled_add(-delta, &col);
            self.beta[k] = new;
        }
        curvature * delta.abs()
    }

    /// Averages coefficients within each group of identical columns. The
    /// objective is convex and invariant under permuting such coefficients,
    /// so the average never increases it.
    fn symmetrize(&mut self, groups: &[Vec<usize>]) {
        for g in groups {
            let avg = g.iter().map(|&k| self.beta[k]).sum::<f64>() / g.len() as f64;
            for &k in g {
                self.beta[k] = avg;
            }
        }
    }

    fn objective(&self) -> f64 {
        let rss = self.r.dot(&self.r);
        let ridge: f64 = self.beta.iter().map(|b| b * b).sum();
        let l1: f64 = self.beta.iter().zip(self.l1).map(|(b, l)| l * b.abs()).sum();
        rss + self.l2 * ridge + l1
    }

    /// Largest stationarity violation that exceeds what rounding in the
    /// gradient can explain, measured against `tol`.
    fn kkt_excess(&self, tol: f64) -> (f64, bool) {
        let n = self.r.len();
        // |y| + |X||β| bounds the magnitude of the terms summed into r.
        let mut scale = self.y.mapv(f64::abs);
        for (k, col) in self.cols.outer_iter().enumerate() {
            let b = self.beta[k].abs();
            if b != 0.0 {
                scale.zip_mut_with(&col, |s, &x| *s += x.abs() * b);
            }
        }
        let mut worst = 0.0f64;
        let mut ok = true;
        for (k, col) in self.cols.outer_iter().enumerate() {
            let g = 2.0 * col.dot(&self.r);
            let b = self.beta[k];
            let v = if b != 0.0 {
                (-g + self.l1[k] * b.signum() + 2.0 * self.l2 * b).abs()
            } else {
                (g.abs() - self.l1[k]).max(0.0)
            };
            let floor = 2.0 * (n as f64).sqrt() * 8.0 * f64::EPSILON * col.mapv(f64::abs).dot(&scale)
                + 4.0 * f64::EPSILON * (self.l1[k] + 2.0 * self.l2 * b.abs());
            if v > tol.max(floor) {
                ok = false;
            }
            worst = worst.max(v);
        }
        (worst, ok)
    }
}

pub(crate) fn solve(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    l1: &[f64],
    l2: f64,
    opts: &SolverOptions,
) -> Outcome {
    let p = x.ncols();
    let cols = x.t().as_standard_layout().into_owned();
    let colsq: Vec<f64> = cols.outer_iter().map(|c| c.dot(&c)).collect();
    let groups = duplicate_groups(&cols, l1);
    let sym_groups: &[Vec<usize>] = if l2 > 0.0 { &groups } else { &[] };

    let beta = match &opts.warm_start {
        Some(w) if w.len() == p => w.clone(),
        _ => vec![0.0; p],
    };
    let mut st = State {
        cols,
        y,
        colsq,
        l1,
        l2,
        beta,
        r: Array1::zeros(y.len()),
    };
    st.refresh_residual();

    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(st.objective());
    }
    let mut active: Vec<usize> = Vec::new();
    let mut full = true;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let mut max_change = 0.0f64;
        if full {
            for k in 0..p {
                max_change = max_change.max(st.update(k));
            }
        } else {
            for &k in &active {
                max_change = max_change.max(st.update(k));
            }
        }
        st.symmetrize(sym_groups);
        if opts.record_trace {
            trace.push(st.objective());
        }
        let small = max_change < opts.tolerance;
        if full {
            let next: Vec<usize> = (0..p).filter(|&k| st.beta[k] != 0.0).collect();
            active = next;
            if small {
                st.refresh_residual();
                let (worst, ok) = st.kkt_excess(opts.tolerance);
                max_violation = worst;
                if ok {
                    converged = true;
                    break;
                }
            } else if !active.is_empty() {
                full = false;
            }
        } else if small {
            full = true;
        }
    }
    if !converged {
        st.refresh_residual();
        max_violation = st.kkt_excess(opts.tolerance).0;
    }
    Outcome {
        beta: st.beta,
        iterations,
        converged,
        max_violation,
        trace,
        duplicate_groups: groups,
    }
}
