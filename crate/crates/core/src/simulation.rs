//! The eight-predictor duplicated-column experiment and a p ≫ n generator
//! with correlated predictor groups.

use std::io::Write;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{fmt_f64, standardize, unstandardize_coefficients, CoefficientVector, Dataset};
use crate::diagnostics::{group_effect, mse, GroupEffectReport};
use crate::error::{Error, Result};
use crate::selection::{
    cross_validate_prepared, cv_lambda1_grid, default_ridge_grid, make_folds, prepare_folds, refit, CvPlan,
};
use crate::smoothing::{partial_out, Kernel, SmootherConfig};
use crate::solver::{adaptive_weights, AlassoOptions, Method, PenaltySpec, SolverOptions};

/// True coefficients of the experiment.
pub const TRUE_BETA: [f64; 8] = [-2.0, 1.0, 1.0, 0.0, 2.0 / 3.0, 0.0, 0.0, 0.0];

/// Zero-based indices of the duplicated pair `(x2, x3)`.
pub const DUPLICATE_PAIR: (usize, usize) = (1, 2);

/// Share of replicates allowed to fail before the run is rejected.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonparametric {
    /// `f(T) = T²`, `T ~ U[−1, 1]`.
    Tsquared,
}

impl Nonparametric {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Nonparametric::Tsquared => t * t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub reps: usize,
    pub sigma: f64,
    pub lambda2: f64,
    pub cv_folds: usize,
    pub seed: u64,
    pub f_nonparametric: Nonparametric,
    pub kernel: Kernel,
    /// `h = c · n^(−1/5)`.
    pub bandwidth_c: f64,
    pub grid_size: usize,
    pub solver: SolverOptions,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n: 1000,
            reps: 50,
            sigma: 0.2,
            lambda2: 1.0 / 3.0,
            cv_folds: 10,
            seed: 2024,
            f_nonparametric: Nonparametric::Tsquared,
            kernel: Kernel::Box,
            bandwidth_c: 1.0,
            grid_size: 50,
            solver: SolverOptions::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::Config(format!("n must be at least 10, got {}", self.n)));
        }
        if self.reps < 1 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.lambda2 > 0.0 && self.lambda2.is_finite()) {
            return Err(Error::Config(format!("lambda2 must be positive, got {}", self.lambda2)));
        }
        if self.cv_folds < 2 || self.cv_folds > self.n {
            return Err(Error::Config(format!("invalid fold count {}", self.cv_folds)));
        }
        if self.grid_size < 2 {
            return Err(Error::Config("grid size must be at least 2".into()));
        }
        self.solver.validate()?;
        SmootherConfig::rule_of_thumb(self.kernel, self.n, self.bandwidth_c).map(|_| ())
    }

    pub fn smoother(&self) -> Result<SmootherConfig> {
        SmootherConfig::rule_of_thumb(self.kernel, self.n, self.bandwidth_c)
    }
}

/// Independent stream per replicate, so any scheduling gives the same draws.
fn replicate_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64 + 1);
    rng
}

fn column_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// One replicate of the duplicated-column design.
pub fn generate_dgp(config: &SimulationConfig, rep: usize) -> Result<(Dataset, CoefficientVector)> {
    config.validate()?;
    let n = config.n;
    let mut rng = replicate_rng(config.seed, rep);
    let unif = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut x = Array2::<f64>::zeros((n, 8));
    let mut t = Array1::<f64>::zeros(n);
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
        let (x1, x2, x5, x6, x7, x8, e) = (z(), z(), z(), z(), z(), z(), z());
        let x3 = x2;
        let x4 = 2.0 / 3.0 * x1 + 1.0 / 3.0 * x2 + 1.0 / 3.0 * x3 + 2.0 / 3.0 * e;
        let row = [x1, x2, x3, x4, x5, x6, x7, x8];
        let ti = unif.sample(&mut rng);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let eps = config.sigma * eps;
        let lin: f64 = row.iter().zip(TRUE_BETA).map(|(a, b)| a * b).sum();
        for (j, v) in row.iter().enumerate() {
            x[[i, j]] = *v;
        }
        t[i] = ti;
        y[i] = lin + config.f_nonparametric.eval(ti) + eps;
    }
    let names = column_names(8);
    let truth = CoefficientVector::new(TRUE_BETA.to_vec(), names.clone())?;
    Ok((Dataset::new(y, t, x, names)?, truth))
}

/// Fit of one method in one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    /// Raw-scale coefficients.
    pub coefficients: Vec<f64>,
    pub standardized_coefficients: Vec<f64>,
    /// Selected λ₁ (λ₂ for ridge).
    pub tuned_value: f64,
    pub selected_index: usize,
    pub mse: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub rep: usize,
    pub methods: Vec<MethodOutcome>,
    /// ENet group effect for `(x2, x3)`.
    pub group_effect: GroupEffectReport,
    pub cv_fallbacks: usize,
    pub cv_nonconverged: usize,
}

impl ReplicateOutcome {
    pub fn method(&self, m: Method) -> Option<&MethodOutcome> {
        self.methods.iter().find(|o| o.method == m)
    }

    pub fn failed(&self) -> bool {
        self.methods.iter().any(|m| !m.converged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_coefficients: Vec<f64>,
    pub mse_mean: f64,
    pub mse_sd: f64,
    /// Share of replicates with a non-zero estimate, per coefficient.
    pub selection_frequency: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEffectSummary {
    pub pair: (String, String),
    pub d_values: Vec<f64>,
    pub m_values: Vec<f64>,
    pub bounds: Vec<f64>,
    pub max_d: f64,
    pub all_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: SimulationConfig,
    pub column_names: Vec<String>,
    pub true_beta: Vec<f64>,
    pub methods: Vec<MethodSummary>,
    pub group_effect_summary: GroupEffectSummary,
    pub replicates: Vec<ReplicateOutcome>,
    pub failed_replicates: Vec<usize>,
}

impl ExperimentReport {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    /// Mean coefficients per method, one row per method.
    pub fn write_coefficient_table<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "method,{}", self.column_names.join(","))?;
        write!(w, "true")?;
        for b in &self.true_beta {
            write!(w, ",{}", fmt_f64(*b))?;
        }
        writeln!(w)?;
        for s in &self.methods {
            write!(w, "{}", s.method)?;
            for b in &s.mean_coefficients {
                write!(w, ",{}", fmt_f64(*b))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_mse_table<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "method,mse_mean,mse_sd,replicates")?;
        let used = self.replicates.len() - self.failed_replicates.len();
        for s in &self.methods {
            writeln!(w, "{},{},{},{used}", s.method, fmt_f64(s.mse_mean), fmt_f64(s.mse_sd))?;
        }
        Ok(())
    }

    pub fn write_selection_table<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "method,{}", self.column_names.join(","))?;
        for s in &self.methods {
            write!(w, "{}", s.method)?;
            for f in &s.selection_frequency {
                write!(w, ",{}", fmt_f64(*f))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Generates, standardizes, smooths and fits all compared methods for one
/// replicate.
pub fn run_replicate(config: &SimulationConfig, rep: usize) -> Result<ReplicateOutcome> {
    let (raw, truth) = generate_dgp(config, rep)?;
    let (d, info) = standardize(&raw)?;
    let smoother = config.smoother()?;
    let pr = partial_out(&d, &smoother)?;

    let fold_seed: u64 = replicate_rng(config.seed ^ 0x5eed_f01d, rep).random();
    let assignment = make_folds(d.n(), config.cv_folds, fold_seed)?;
    let folds = prepare_folds(&d, &assignment, config.cv_folds, &smoother)?;
    let opts = &config.solver;

    let weights = adaptive_weights(&pr, &AlassoOptions::default())?;
    let mut methods = Vec::with_capacity(Method::COMPARED.len());
    let mut enet_fit = None;
    let mut cv_fallbacks = 0;
    let mut cv_nonconverged = 0;
    for method in Method::COMPARED {
        let (template, grid, lambda2) = match method {
            Method::Lasso => {
                let t = PenaltySpec::lasso(0.0);
                let g = cv_lambda1_grid(&pr, &folds, &t, config.grid_size)?;
                (t, g, 0.0)
            }
            Method::Alasso => {
                let t = PenaltySpec::alasso(0.0, weights.clone(), AlassoOptions::default().gamma);
                let g = cv_lambda1_grid(&pr, &folds, &t, config.grid_size)?;
                (t, g, 0.0)
            }
            Method::Enet => {
                let t = PenaltySpec::enet(0.0, config.lambda2);
                let g = cv_lambda1_grid(&pr, &folds, &t, config.grid_size)?;
                (t, g, config.lambda2)
            }
            Method::Ridge => (PenaltySpec::ridge(1.0), default_ridge_grid(&pr, config.grid_size)?, 0.0),
            Method::Ols => unreachable!("not a compared method"),
        };
        let plan = CvPlan {
            k: config.cv_folds,
            grid,
            lambda2,
            seed: fold_seed,
            fold_assignment: assignment.clone(),
            one_se: false,
        };
        let cv = cross_validate_prepared(&folds, &plan, &template, opts)?;
        cv_fallbacks += cv.fallback_count;
        cv_nonconverged += cv.nonconverged_fits;
        let idx = cv.best_index;
        let fit = refit(&pr, &template, cv.grid[idx], opts)?;
        let orig = unstandardize_coefficients(&fit.beta, &info)?;
        methods.push(MethodOutcome {
            method,
            coefficients: orig.coefficients.values.clone(),
            standardized_coefficients: fit.beta.values.clone(),
            tuned_value: cv.grid[idx],
            selected_index: idx,
            mse: mse(&orig.coefficients, &truth)?,
            converged: fit.converged,
        });
        if method == Method::Enet {
            enet_fit = Some(fit);
        }
    }
    let enet_fit = enet_fit.expect("enet is a compared method");
    let ge = group_effect(&enet_fit, d.x(), DUPLICATE_PAIR, config.lambda2)?;
    Ok(ReplicateOutcome {
        rep,
        methods,
        group_effect: ge,
        cv_fallbacks,
        cv_nonconverged,
    })
}

fn summarize(method: Method, reps: &[&ReplicateOutcome], p: usize) -> MethodSummary {
    let m = reps.len() as f64;
    let mut mean = vec![0.0; p];
    let mut freq = vec![0.0; p];
    let mut errs = Vec::with_capacity(reps.len());
    for r in reps {
        let o = r.method(method).expect("every method fitted");
        for j in 0..p {
            mean[j] += o.coefficients[j];
            if o.coefficients[j] != 0.0 {
                freq[j] += 1.0;
            }
        }
        errs.push(o.mse);
    }
    mean.iter_mut().for_each(|v| *v /= m);
    freq.iter_mut().for_each(|v| *v /= m);
    let mse_mean = errs.iter().sum::<f64>() / m;
    let mse_sd = if reps.len() > 1 {
        (errs.iter().map(|e| (e - mse_mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    MethodSummary {
        method,
        mean_coefficients: mean,
        mse_mean,
        mse_sd,
        selection_frequency: freq,
    }
}

/// Runs every replicate (in parallel) and aggregates over those whose
/// final fits converged.
pub fn run_experiment(config: &SimulationConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let replicates: Vec<ReplicateOutcome> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_replicate(config, rep))
        .collect::<Result<_>>()?;
    let failed: Vec<usize> = replicates.iter().filter(|r| r.failed()).map(|r| r.rep).collect();
    if failed.len() as f64 > MAX_FAILURE_RATE * config.reps as f64 || failed.len() == config.reps {
        return Err(Error::ExperimentFailed {
            failed: failed.len(),
            total: config.reps,
        });
    }
    let ok: Vec<&ReplicateOutcome> = replicates.iter().filter(|r| !r.failed()).collect();
    let p = TRUE_BETA.len();
    let methods = Method::COMPARED.iter().map(|&m| summarize(m, &ok, p)).collect();
    let names = column_names(p);
    let ge: Vec<&GroupEffectReport> = ok.iter().map(|r| &r.group_effect).collect();
    let group_effect_summary = GroupEffectSummary {
        pair: (names[DUPLICATE_PAIR.0].clone(), names[DUPLICATE_PAIR.1].clone()),
        d_values: ge.iter().map(|g| g.d_value).collect(),
        m_values: ge.iter().map(|g| g.m_value).collect(),
        bounds: ge.iter().map(|g| g.bound).collect(),
        max_d: ge.iter().map(|g| g.d_value).fold(0.0, f64::max),
        all_satisfied: ge.iter().all(|g| g.satisfied(0.0)),
    };
    Ok(ExperimentReport {
        config: config.clone(),
        column_names: names,
        true_beta: TRUE_BETA.to_vec(),
        methods,
        group_effect_summary,
        replicates,
        failed_replicates: failed,
    })
}

/// Layout of the p ≫ n generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PggnDesign {
    pub n: usize,
    pub p: usize,
    /// Sizes of the correlated groups, occupying the leading columns.
    pub group_sizes: Vec<usize>,
    /// Number of leading groups carrying signal.
    pub active_groups: usize,
    /// Noise sd of a member around its group factor.
    pub within_noise: f64,
    /// Noise sd added to the linear predictor before thresholding.
    pub response_noise: f64,
}

impl PggnDesign {
    pub fn new(n: usize, p: usize, group_sizes: Vec<usize>) -> Self {
        let active_groups = group_sizes.len();
        PggnDesign {
            n,
            p,
            group_sizes,
            active_groups,
            within_noise: 0.1,
            response_noise: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p <= self.n {
            return Err(Error::Config(format!("need p > n ≥ 2, got n = {}, p = {}", self.n, self.p)));
        }
        if self.group_sizes.iter().any(|&g| g < 2) {
            return Err(Error::Config("correlated groups need at least two members".into()));
        }
        if self.group_sizes.iter().sum::<usize>() > self.p {
            return Err(Error::Config(format!(
                "groups of sizes {:?} do not fit in {} columns",
                self.group_sizes, self.p
            )));
        }
        if self.active_groups > self.group_sizes.len() {
            return Err(Error::Config("more active groups than groups".into()));
        }
        if !(self.within_noise > 0.0 && self.response_noise >= 0.0) {
            return Err(Error::Config("noise levels must be positive".into()));
        }
        Ok(())
    }

    /// Column ranges of the groups.
    pub fn groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.group_sizes
            .iter()
            .map(|&g| {
                let r = start..start + g;
                start += g;
                r
            })
            .collect()
    }
}

/// p ≫ n design with every group active; see [`generate_pggn_with`].
pub fn generate_pggn(
    n: usize,
    p: usize,
    group_sizes: &[usize],
    seed: u64,
) -> Result<(Dataset, CoefficientVector)> {
    generate_pggn_with(&PggnDesign::new(n, p, group_sizes.to_vec()), seed)
}

/// Groups are a shared standard normal factor plus small independent noise
/// (correlation `1 / (1 + within_noise²)`); remaining columns are independent.
/// Active groups get coefficients `±1` on every member, alternating in sign
/// by group. The response is the linear predictor plus noise and `T²`,
/// coded 1 above its median and 0 otherwise.
pub fn generate_pggn_with(design: &PggnDesign, seed: u64) -> Result<(Dataset, CoefficientVector)> {
    design.validate()?;
    let (n, p) = (design.n, design.p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::<f64>::zeros((n, p));
    let groups = design.groups();
    let mut beta = vec![0.0; p];
    for (g, range) in groups.iter().enumerate() {
        if g < design.active_groups {
            let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
            for j in range.clone() {
                beta[j] = sign;
            }
        }
    }
    let grouped: usize = design.group_sizes.iter().sum();
    let unif = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut t = Array1::<f64>::zeros(n);
    let mut eta = Array1::<f64>::zeros(n);
    for i in 0..n {
        for range in &groups {
            let factor: f64 = StandardNormal.sample(&mut rng);
            for j in range.clone() {
                let e: f64 = StandardNormal.sample(&mut rng);
                x[[i, j]] = factor + design.within_noise * e;
            }
        }
        for j in grouped..p {
            x[[i, j]] = StandardNormal.sample(&mut rng);
        }
        t[i] = unif.sample(&mut rng);
        let noise: f64 = StandardNormal.sample(&mut rng);
        let lin: f64 = (0..p).map(|j| x[[i, j]] * beta[j]).sum();
        eta[i] = lin + t[i] * t[i] + design.response_noise * noise;
    }
    let mut sorted = eta.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 0 {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    };
    let y = eta.mapv(|v| if v > median { 1.0 } else { 0.0 });
    let names = column_names(p);
    let truth = CoefficientVector::new(beta, names.clone())?;
    Ok((Dataset::new(y, t, x, names)?, truth))
}
