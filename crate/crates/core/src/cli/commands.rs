use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use super::args::*;
use super::manifest::{canonical_input, OutDir, RunManifest};
use super::CliError;
use crate::data::{
    apply_standardization, fmt_f64, load_csv, standardize, unstandardize_coefficients, write_csv, ColumnRoles,
    CoefficientVector, Dataset, StandardizationInfo,
};
use crate::diagnostics::{group_effect, kkt_check, GroupEffectReport, KktReport};
use crate::error::Error;
use crate::selection::{
    cross_validate_prepared, cv_lambda1_grid, default_lambda1_grid, default_ridge_grid, make_folds, prepare_folds,
    refit, CvPlan, CvResult,
};
use crate::simulation::{generate_dgp, generate_pggn, run_experiment, SimulationConfig};
use crate::smoothing::{nw_smooth_at, partial_out, PartialResiduals, SmootherConfig};
use crate::solver::{
    adaptive_weights, fit_path, fit_ridge_closed_form, AlassoOptions, FitResult, Method, PenaltySpec, SolverOptions,
};

type CliResult<T> = std::result::Result<T, CliError>;

pub fn execute(command: Command) -> CliResult<RunManifest> {
    match command {
        Command::Fit(a) => run_fit(&a),
        Command::Cv(a) => run_cv(&a),
        Command::Simulate(a) => run_simulate(&a),
        Command::GroupEffect(a) => run_group_effect(&a),
        Command::Smooth(a) => run_smooth(&a),
        Command::Generate(a) => run_generate(&a),
        Command::Rerun(a) => run_rerun(&a),
    }
}

/// Loaded, optionally standardized and partialled-out input.
struct Prepared {
    data: Dataset,
    info: StandardizationInfo,
    smoother: SmootherConfig,
    pr: PartialResiduals,
}

fn roles(d: &DataArgs) -> ColumnRoles {
    ColumnRoles {
        response: d.response.clone(),
        covariate: d.covariate.clone(),
        predictors: d.predictors.clone(),
    }
}

fn resolve_smoother(s: &SmootherArgs, n: usize) -> CliResult<SmootherConfig> {
    Ok(match s.bandwidth {
        Some(h) => SmootherConfig::fixed(s.kernel, h)?,
        None => SmootherConfig::rule_of_thumb(s.kernel, n, s.bandwidth_c.unwrap_or(1.0))?,
    })
}

fn prepare(d: &DataArgs, s: &SmootherArgs) -> CliResult<Prepared> {
    let raw = load_csv(&d.data, &roles(d))?;
    let (data, info) = if d.no_standardize {
        let p = raw.p();
        (raw, StandardizationInfo::identity(p))
    } else {
        standardize(&raw)?
    };
    let smoother = resolve_smoother(s, data.n())?;
    let pr = partial_out(&data, &smoother)?;
    Ok(Prepared {
        data,
        info,
        smoother,
        pr,
    })
}

fn solver_options(s: &SolverArgs) -> SolverOptions {
    SolverOptions {
        tolerance: s.tolerance,
        max_iterations: s.max_iter,
        rescaled: s.rescaled,
        ..SolverOptions::default()
    }
}

fn alasso_options(p: &PenaltyArgs) -> AlassoOptions {
    AlassoOptions {
        gamma: p.gamma,
        init_lambda2: p.init_lambda2,
    }
}

fn forbid(value: Option<f64>, flag: &str, method: Method, why: &str) -> CliResult<()> {
    match value {
        Some(v) if v != 0.0 => Err(Error::Penalty(format!("--{flag} {v} conflicts with --method {method}: {why}")).into()),
        _ => Ok(()),
    }
}

/// Penalty of a single fit.
fn fixed_penalty(p: &PenaltyArgs, pr: &PartialResiduals) -> CliResult<PenaltySpec> {
    let l1 = p.lambda1.unwrap_or(0.0);
    let spec = match p.method {
        Method::Enet => PenaltySpec::enet(l1, p.lambda2.unwrap_or(0.0)),
        Method::Lasso => {
            forbid(p.lambda2, "lambda2", p.method, "lasso forces lambda2 = 0")?;
            PenaltySpec::lasso(l1)
        }
        Method::Alasso => {
            forbid(p.lambda2, "lambda2", p.method, "adaptive lasso forces lambda2 = 0")?;
            PenaltySpec::alasso(l1, adaptive_weights(pr, &alasso_options(p))?, p.gamma)
        }
        Method::Ridge => {
            forbid(p.lambda1, "lambda1", p.method, "ridge forces lambda1 = 0")?;
            PenaltySpec::ridge(p.lambda2.unwrap_or(0.0))
        }
        Method::Ols => {
            forbid(p.lambda1, "lambda1", p.method, "no penalty")?;
            forbid(p.lambda2, "lambda2", p.method, "no penalty")?;
            PenaltySpec::ols()
        }
    };
    spec.validate(pr.p())?;
    Ok(spec)
}

/// Template whose tuned value is chosen by cross-validation.
fn cv_template(p: &PenaltyArgs, pr: &PartialResiduals) -> CliResult<PenaltySpec> {
    let spec = match p.method {
        Method::Ridge => {
            forbid(p.lambda1, "lambda1", p.method, "ridge forces lambda1 = 0")?;
            if p.lambda2.is_some() {
                return Err(CliError::Usage("--lambda2 is selected by cross-validation for ridge".into()));
            }
            PenaltySpec::ridge(0.0)
        }
        Method::Ols => return Err(CliError::Usage("ols has no penalty to cross-validate".into())),
        m => {
            if p.lambda1.is_some() {
                return Err(CliError::Usage("--lambda1 is selected by cross-validation".into()));
            }
            match m {
                Method::Enet => PenaltySpec::enet(0.0, p.lambda2.unwrap_or(0.0)),
                Method::Lasso => {
                    forbid(p.lambda2, "lambda2", m, "lasso forces lambda2 = 0")?;
                    PenaltySpec::lasso(0.0)
                }
                _ => {
                    forbid(p.lambda2, "lambda2", m, "adaptive lasso forces lambda2 = 0")?;
                    PenaltySpec::alasso(0.0, adaptive_weights(pr, &alasso_options(p))?, p.gamma)
                }
            }
        }
    };
    spec.validate(pr.p())?;
    Ok(spec)
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub method: Method,
    pub lambda1: f64,
    pub lambda2: f64,
    pub adaptive_weights: Option<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dual_gap_proxy: f64,
    pub rescaled: bool,
    pub notes: Vec<String>,
    /// Raw-scale intercept-like offset.
    pub offset: f64,
    pub response: String,
    pub covariate: String,
    pub n: usize,
    pub p: usize,
    pub standardization: StandardizationInfo,
    pub smoother: SmootherConfig,
}

#[derive(Debug, Deserialize)]
struct CoefficientRow {
    name: String,
    standardized: f64,
}

#[derive(Debug, Deserialize)]
struct ResidualRow {
    residual: f64,
}

/// Writes coefficients, residuals, KKT report, summary and the design used.
fn write_fit(out: &mut OutDir, prep: &Prepared, spec: &PenaltySpec, fit: &FitResult, opts: &SolverOptions) -> CliResult<()> {
    let orig = unstandardize_coefficients(&fit.beta, &prep.info)?;
    let mut text = String::from("name,standardized,original\n");
    for ((name, b), o) in fit.beta.names.iter().zip(&fit.beta.values).zip(&orig.coefficients.values) {
        writeln!(text, "{name},{},{}", fmt_f64(*b), fmt_f64(*o)).unwrap();
    }
    out.write("coefficients.csv", text.as_bytes())?;

    let mut text = String::from("row,t,y_tilde,fitted,residual\n");
    let t = prep.data.t();
    for (i, r) in fit.residuals.iter().enumerate() {
        let yt = prep.pr.y_tilde[i];
        writeln!(text, "{},{},{},{},{}", i + 1, fmt_f64(t[i]), fmt_f64(yt), fmt_f64(yt - r), fmt_f64(*r)).unwrap();
    }
    out.write("residuals.csv", text.as_bytes())?;

    // stationarity holds for the naive minimizer
    let mut naive = fit.beta.clone();
    if opts.rescaled && spec.lambda2 > 0.0 {
        naive.values.iter_mut().for_each(|b| *b /= 1.0 + spec.lambda2);
    }
    let kkt: KktReport = kkt_check(&naive, &prep.pr, spec, 10.0 * opts.tolerance)?;
    out.write_json("kkt.json", &kkt)?;

    let summary = FitSummary {
        method: spec.method,
        lambda1: spec.lambda1,
        lambda2: spec.lambda2,
        adaptive_weights: spec.adaptive_weights.clone(),
        objective: fit.objective,
        iterations: fit.iterations,
        converged: fit.converged,
        dual_gap_proxy: fit.dual_gap_proxy,
        rescaled: opts.rescaled,
        notes: fit.notes.clone(),
        offset: orig.offset,
        response: prep.data.response_name().to_string(),
        covariate: prep.data.covariate_name().to_string(),
        n: prep.data.n(),
        p: prep.data.p(),
        standardization: prep.info.clone(),
        smoother: prep.smoother.clone(),
    };
    out.write_json("fit.json", &summary)?;

    let mut buf = Vec::new();
    write_csv(&prep.data, &mut buf).map_err(|e| CliError::Output(e.to_string()))?;
    out.write("design.csv", &buf)?;
    Ok(())
}

fn path_grid(pr: &PartialResiduals, template: &PenaltySpec, size: usize) -> CliResult<Vec<f64>> {
    Ok(match template.method {
        Method::Ridge => default_ridge_grid(pr, size)?,
        Method::Ols => return Err(CliError::Usage("ols has no penalty path".into())),
        _ => default_lambda1_grid(pr, template, size)?,
    })
}

fn write_path(out: &mut OutDir, pr: &PartialResiduals, template: &PenaltySpec, grid: &[f64], opts: &SolverOptions) -> CliResult<()> {
    let fits = if template.method == Method::Ridge {
        grid.iter()
            .map(|&l| fit_ridge_closed_form(pr, l))
            .collect::<crate::Result<Vec<_>>>()?
    } else {
        fit_path(pr, template, grid, opts)?
    };
    let mut text = format!("value,nonzero,converged,{}\n", pr.column_names.join(","));
    for (v, f) in grid.iter().zip(&fits) {
        write!(text, "{},{},{}", fmt_f64(*v), f.beta.nonzero_count(), f.converged).unwrap();
        for b in &f.beta.values {
            write!(text, ",{}", fmt_f64(*b)).unwrap();
        }
        text.push('\n');
    }
    out.write("path.csv", text.as_bytes())
}

#[derive(Debug, Serialize)]
struct PredictionSummary {
    rows: usize,
    fallback_rows: usize,
    threshold: Option<f64>,
    misclassified: Option<usize>,
}

/// Predicts a new file: its rows are standardized with the training record
/// and smoothed against the training rows.
fn write_predictions(
    out: &mut OutDir,
    prep: &Prepared,
    fit: &FitResult,
    path: &Path,
    roles: &ColumnRoles,
    threshold: Option<f64>,
) -> CliResult<()> {
    let raw = load_csv(path, roles)?;
    if raw.column_names() != prep.data.column_names() {
        return Err(Error::Schema(format!(
            "{} has predictors {:?}, the fit used {:?}",
            path.display(),
            raw.column_names(),
            prep.data.column_names()
        ))
        .into());
    }
    let new = apply_standardization(&raw, &prep.info)?;
    let train = &prep.data;
    let p = train.p();
    let mut joint = Array2::zeros((train.n(), p + 1));
    joint.column_mut(0).assign(&train.y());
    joint.slice_mut(s![.., 1..]).assign(&train.x());
    let (m, fallback) = nw_smooth_at(joint.view(), train.t(), new.t(), &prep.smoother)?;
    let beta = &fit.beta.values;
    let shift = if prep.info.applied { prep.info.y_mean } else { 0.0 };

    let mut text = String::from(if threshold.is_some() { "row,t,y,prediction,class\n" } else { "row,t,y,prediction\n" });
    let mut wrong = 0;
    for i in 0..new.n() {
        let lin: f64 = (0..p).map(|j| (new.x()[[i, j]] - m[[i, j + 1]]) * beta[j]).sum();
        let pred = m[[i, 0]] + lin + shift;
        let y = raw.y()[i];
        write!(text, "{},{},{},{}", i + 1, fmt_f64(raw.t()[i]), fmt_f64(y), fmt_f64(pred)).unwrap();
        if let Some(c) = threshold {
            let class = if pred > c { 1.0 } else { 0.0 };
            if class != y {
                wrong += 1;
            }
            write!(text, ",{class}").unwrap();
        }
        text.push('\n');
    }
    out.write("predictions.csv", text.as_bytes())?;
    out.write_json(
        "predictions.json",
        &PredictionSummary {
            rows: new.n(),
            fallback_rows: fallback.len(),
            threshold,
            misclassified: threshold.map(|_| wrong),
        },
    )
}

fn canonical_data(d: &mut DataArgs) -> CliResult<()> {
    d.data = canonical_input(&d.data)?;
    Ok(())
}

fn canonical_output_args(o: &mut OutputArgs) -> CliResult<()> {
    if let Some(p) = &o.predict {
        o.predict = Some(canonical_input(p)?);
    }
    Ok(())
}

fn inputs(d: &DataArgs, o: &OutputArgs) -> Vec<PathBuf> {
    let mut v = vec![d.data.clone()];
    v.extend(o.predict.clone());
    v
}

pub fn run_fit(args: &FitArgs) -> CliResult<RunManifest> {
    let mut a = args.clone();
    canonical_data(&mut a.data)?;
    canonical_output_args(&mut a.output)?;
    let prep = prepare(&a.data, &a.smoother)?;
    let opts = solver_options(&a.solver);
    opts.validate()?;
    let spec = fixed_penalty(&a.penalty, &prep.pr)?;
    let fit = refit(&prep.pr, &spec, spec.tuned_value(), &opts)?;

    let mut out = OutDir::create(&args.out)?;
    write_fit(&mut out, &prep, &spec, &fit, &opts)?;
    if a.output.emit_path {
        let grid = path_grid(&prep.pr, &spec, a.grid_size)?;
        write_path(&mut out, &prep.pr, &spec, &grid, &opts)?;
    }
    if let Some(p) = &a.output.predict {
        write_predictions(&mut out, &prep, &fit, p, &roles(&a.data), a.output.threshold)?;
    }
    let manifest = out.finish("fit", &a, Some(a.seed), &inputs(&a.data, &a.output))?;
    if !fit.converged {
        return Err(CliError::NotConverged(format!(
            "{} sweeps, largest stationarity violation {:.3e}",
            fit.iterations, fit.dual_gap_proxy
        )));
    }
    Ok(manifest)
}

/// Contents of `cv.json`.
#[derive(Debug, Serialize)]
struct CvSummary<'a> {
    method: Method,
    tuned: &'static str,
    chosen_index: usize,
    chosen_value: f64,
    one_se: bool,
    plan: &'a CvPlan,
    result: &'a CvResult,
}

pub fn run_cv(args: &CvArgs) -> CliResult<RunManifest> {
    let mut a = args.clone();
    canonical_data(&mut a.data)?;
    canonical_output_args(&mut a.output)?;
    let prep = prepare(&a.data, &a.smoother)?;
    let opts = solver_options(&a.solver);
    opts.validate()?;
    let template = cv_template(&a.penalty, &prep.pr)?;
    let n = prep.data.n();

    let assignment = make_folds(n, a.cv_folds, a.seed)?;
    let folds = prepare_folds(&prep.data, &assignment, a.cv_folds, &prep.smoother)?;
    let grid = match template.method {
        Method::Ridge => default_ridge_grid(&prep.pr, a.grid_size)?,
        _ => cv_lambda1_grid(&prep.pr, &folds, &template, a.grid_size)?,
    };
    let plan = CvPlan {
        k: a.cv_folds,
        grid,
        lambda2: if template.method == Method::Ridge { 0.0 } else { template.lambda2 },
        seed: a.seed,
        fold_assignment: assignment,
        one_se: a.one_se,
    };
    plan.validate(n)?;
    let cv = cross_validate_prepared(&folds, &plan, &template, &opts)?;
    let idx = cv.selected_index(a.one_se);
    let value = cv.grid[idx];
    let spec = template.with_tuned_value(value);
    let fit = refit(&prep.pr, &template, value, &opts)?;

    let mut out = OutDir::create(&args.out)?;
    let mut text = String::from("value,mean_error,se_error\n");
    for j in 0..cv.grid.len() {
        writeln!(
            text,
            "{},{},{}",
            fmt_f64(cv.grid[j]),
            fmt_f64(cv.mean_cv_error[j]),
            fmt_f64(cv.se_cv_error[j])
        )
        .unwrap();
    }
    out.write("cv_curve.csv", text.as_bytes())?;
    out.write_json(
        "cv.json",
        &CvSummary {
            method: template.method,
            tuned: if template.method == Method::Ridge { "lambda2" } else { "lambda1" },
            chosen_index: idx,
            chosen_value: value,
            one_se: a.one_se,
            plan: &plan,
            result: &cv,
        },
    )?;
    write_fit(&mut out, &prep, &spec, &fit, &opts)?;
    if a.output.emit_path {
        write_path(&mut out, &prep.pr, &template, &plan.grid, &opts)?;
    }
    if let Some(p) = &a.output.predict {
        write_predictions(&mut out, &prep, &fit, p, &roles(&a.data), a.output.threshold)?;
    }
    let manifest = out.finish("cv", &a, Some(a.seed), &inputs(&a.data, &a.output))?;
    if !fit.converged {
        return Err(CliError::NotConverged(format!(
            "final fit at {value:.6e}: {} sweeps, largest stationarity violation {:.3e}",
            fit.iterations, fit.dual_gap_proxy
        )));
    }
    Ok(manifest)
}

#[derive(Debug, Serialize)]
struct SimulationSummary<'a> {
    config: &'a SimulationConfig,
    replicates_used: usize,
    failed_replicates: &'a [usize],
    methods: &'a [crate::simulation::MethodSummary],
    group_effect: &'a crate::simulation::GroupEffectSummary,
}

pub fn run_simulate(args: &SimulateArgs) -> CliResult<RunManifest> {
    let config = SimulationConfig {
        n: args.n,
        reps: args.reps,
        sigma: args.sigma,
        lambda2: args.lambda2,
        cv_folds: args.cv_folds,
        seed: args.seed,
        kernel: args.kernel,
        bandwidth_c: args.bandwidth_c,
        grid_size: args.grid_size,
        ..SimulationConfig::default()
    };
    let report = run_experiment(&config)?;
    let mut out = OutDir::create(&args.out)?;
    let mut buf = Vec::new();
    report
        .write_coefficient_table(&mut buf)
        .map_err(|e| CliError::Output(e.to_string()))?;
    out.write("coefficients_table.csv", &buf)?;
    buf.clear();
    report.write_mse_table(&mut buf).map_err(|e| CliError::Output(e.to_string()))?;
    out.write("mse_table.csv", &buf)?;
    buf.clear();
    report
        .write_selection_table(&mut buf)
        .map_err(|e| CliError::Output(e.to_string()))?;
    out.write("selection_table.csv", &buf)?;
    out.write_json(
        "summary.json",
        &SimulationSummary {
            config: &report.config,
            replicates_used: report.replicates.len() - report.failed_replicates.len(),
            failed_replicates: &report.failed_replicates,
            methods: &report.methods,
            group_effect: &report.group_effect_summary,
        },
    )?;
    out.write_json("replicates.json", &report.replicates)?;
    out.finish("simulate", args, Some(args.seed), &[])
}

/// Parses `all` or `k,l;k,l` with 1-based indices or column names.
pub(crate) fn parse_pairs(spec: &str, names: &[String]) -> CliResult<Vec<(usize, usize)>> {
    let p = names.len();
    if spec.trim() == "all" {
        return Ok((0..p).flat_map(|k| (k + 1..p).map(move |l| (k, l))).collect());
    }
    let column = |tok: &str| -> CliResult<usize> {
        let tok = tok.trim();
        if let Some(j) = names.iter().position(|n| n == tok) {
            return Ok(j);
        }
        match tok.parse::<usize>() {
            Ok(j) if (1..=p).contains(&j) => Ok(j - 1),
            _ => Err(CliError::Usage(format!("`{tok}` is neither a column name nor an index in 1..={p}"))),
        }
    };
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').collect();
            if parts.len() != 2 {
                return Err(CliError::Usage(format!("pair `{pair}` is not of the form k,l")));
            }
            Ok((column(parts[0])?, column(parts[1])?))
        })
        .collect()
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn run_group_effect(args: &GroupEffectArgs) -> CliResult<RunManifest> {
    let mut a = args.clone();
    a.fit_dir = canonical_input(&a.fit_dir)?;
    let dir = &a.fit_dir;
    let files: Vec<PathBuf> = ["fit.json", "design.csv", "coefficients.csv", "residuals.csv"]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    let summary: FitSummary = serde_json::from_str(&read_input(&files[0])?)
        .map_err(|e| CliError::Input(format!("{}: {e}", files[0].display())))?;
    if !(summary.lambda2 > 0.0) {
        return Err(Error::BoundUndefined(format!("the fit in {} has lambda2 = {}", dir.display(), summary.lambda2)).into());
    }
    let design = load_csv(
        &files[1],
        &ColumnRoles {
            response: summary.response.clone(),
            covariate: summary.covariate.clone(),
            predictors: None,
        },
    )?;
    let coefs: Vec<CoefficientRow> = csv::Reader::from_reader(read_input(&files[2])?.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::from)?;
    let residuals: Vec<ResidualRow> = csv::Reader::from_reader(read_input(&files[3])?.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::from)?;
    let mut values: Vec<f64> = coefs.iter().map(|c| c.standardized).collect();
    if summary.rescaled {
        values.iter_mut().for_each(|b| *b /= 1.0 + summary.lambda2);
    }
    let names: Vec<String> = coefs.into_iter().map(|c| c.name).collect();
    let fit = FitResult {
        beta: CoefficientVector::new(values, names.clone())?,
        residuals: residuals.iter().map(|r| r.residual).collect(),
        objective: summary.objective,
        iterations: summary.iterations,
        converged: summary.converged,
        dual_gap_proxy: summary.dual_gap_proxy,
        trace: Vec::new(),
        notes: Vec::new(),
    };
    let pairs = parse_pairs(&a.pairs, &names)?;
    let reports: Vec<GroupEffectReport> = pairs
        .iter()
        .map(|&pair| group_effect(&fit, design.x(), pair, summary.lambda2))
        .collect::<crate::Result<_>>()?;

    let mut text = String::from("k,l,name_k,name_l,d,m,bound,residual_l1,sign_condition_met,satisfied\n");
    for r in &reports {
        let (k, l) = r.pair;
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            k + 1,
            l + 1,
            names[k],
            names[l],
            fmt_f64(r.d_value),
            fmt_f64(r.m_value),
            fmt_f64(r.bound),
            fmt_f64(r.residual_l1),
            r.sign_condition_met,
            r.satisfied(1e-8)
        )
        .unwrap();
    }
    let mut out = OutDir::create(&args.out)?;
    out.write("group_effect.csv", text.as_bytes())?;
    out.finish("group-effect", &a, None, &files)
}

#[derive(Debug, Serialize)]
struct SmoothSummary<'a> {
    smoother: &'a SmootherConfig,
    standardization: &'a StandardizationInfo,
}

pub fn run_smooth(args: &SmoothArgs) -> CliResult<RunManifest> {
    let mut a = args.clone();
    canonical_data(&mut a.data)?;
    let prep = prepare(&a.data, &a.smoother)?;
    let d = &prep.data;
    let pr = &prep.pr;
    let as_dataset = |y: &ndarray::Array1<f64>, x: &Array2<f64>| {
        Dataset::with_roles(
            y.clone(),
            d.t().to_owned(),
            x.clone(),
            d.response_name().to_string(),
            d.covariate_name().to_string(),
            d.column_names().to_vec(),
        )
    };
    let mut out = OutDir::create(&args.out)?;
    for (name, ds) in [
        ("partial_residuals.csv", as_dataset(&pr.y_tilde, &pr.x_tilde)?),
        ("conditional_means.csv", as_dataset(&pr.my_hat, &pr.mx_hat)?),
    ] {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).map_err(|e| CliError::Output(e.to_string()))?;
        out.write(name, &buf)?;
    }
    out.write_json(
        "smoother.json",
        &SmoothSummary {
            smoother: &prep.smoother,
            standardization: &prep.info,
        },
    )?;
    out.finish("smooth", &a, None, &[a.data.data.clone()])
}

pub fn run_generate(args: &GenerateArgs) -> CliResult<RunManifest> {
    let (data, truth) = match args.design {
        DesignKind::Dgp => {
            let config = SimulationConfig {
                n: args.n,
                sigma: args.sigma,
                seed: args.seed,
                ..SimulationConfig::default()
            };
            generate_dgp(&config, args.rep)?
        }
        DesignKind::Pggn => generate_pggn(args.n, args.p, &args.groups, args.seed)?,
    };
    let mut out = OutDir::create(&args.out)?;
    let mut buf = Vec::new();
    write_csv(&data, &mut buf).map_err(|e| CliError::Output(e.to_string()))?;
    out.write("data.csv", &buf)?;
    let mut text = String::from("name,beta\n");
    for (n, b) in truth.names.iter().zip(&truth.values) {
        writeln!(text, "{n},{}", fmt_f64(*b)).unwrap();
    }
    out.write("truth.csv", text.as_bytes())?;
    out.finish("generate", args, Some(args.seed), &[])
}

fn parameters<T: serde::de::DeserializeOwned>(m: &RunManifest) -> CliResult<T> {
    serde_json::from_value(m.parameters.clone())
        .map_err(|e| CliError::Manifest(format!("parameters of `{}` run: {e}", m.command)))
}

pub fn run_rerun(args: &RerunArgs) -> CliResult<RunManifest> {
    let m = RunManifest::load(&args.manifest)?;
    m.verify_inputs()?;
    let out = args.out.clone();
    match m.command.as_str() {
        "fit" => run_fit(&FitArgs { out, ..parameters(&m)? }),
        "cv" => run_cv(&CvArgs { out, ..parameters(&m)? }),
        "simulate" => run_simulate(&SimulateArgs { out, ..parameters(&m)? }),
        "group-effect" => run_group_effect(&GroupEffectArgs { out, ..parameters(&m)? }),
        "smooth" => run_smooth(&SmoothArgs { out, ..parameters(&m)? }),
        "generate" => run_generate(&GenerateArgs { out, ..parameters(&m)? }),
        other => Err(CliError::Manifest(format!("unknown command `{other}`"))),
    }
}
