//! L1-penalized least squares by cyclic coordinate descent.
//!
//! The objective is the unnormalized form
//!
//! ```text
//! sum_i (y_i - alpha - sum_j beta_j x_ij)^2 + lambda * sum_j |beta_j|
//! ```
//!
//! with no 1/(2n) factor. A penalty `lambda_glmnet` in the usual
//! `1/(2n) RSS + lambda_glmnet |beta|_1` convention corresponds to
//! `lambda = 2 n lambda_glmnet` here.
//!
//! The intercept is profiled out by centering: coordinate descent runs on
//! centered columns `x~_j` and a centered target, and afterwards
//! `alpha = mean(y) - sum_j beta_j mean(x_j)`. Each coordinate update is
//! `beta_j <- S(2 x~_j^T r_{-j}, lambda) / (2 x~_j^T x~_j)` where `S` is
//! soft-thresholding and `r_{-j}` the partial residual without feature `j`.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::matrix::{dot, mean};
use crate::stats::ScalingParams;
use crate::timeseries::{split_point, AlignedPanel};

/// Fraction of rows used for fitting when lambda is picked by validation.
pub const SELECTION_TRAIN_FRACTION: f64 = 0.8;
/// Number of log-spaced lambda values tried during selection.
pub const SELECTION_GRID_POINTS: usize = 50;
/// Smallest grid value as a fraction of lambda_max.
pub const SELECTION_GRID_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    /// Penalty weight. `None` selects it on a chronological validation split.
    pub lambda: Option<f64>,
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub standardize_features: bool,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            tolerance: 1e-7,
            max_sweeps: 10_000,
            standardize_features: false,
        }
    }
}

impl LassoConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda: Some(lambda),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be finite and >= 0, got {l}")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Validation curve recorded when lambda was chosen automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSelection {
    pub train_rows: usize,
    pub validation_rows: usize,
    /// (lambda on the training block, validation mse), largest lambda first.
    pub path: Vec<(f64, f64)>,
    pub best_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub labels: Vec<String>,
    /// Intercept on the working (possibly standardized) scale.
    pub intercept: f64,
    /// Coefficients on the working (possibly standardized) scale.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    /// Sum of absolute coefficients.
    pub budget: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    pub objective: f64,
    /// Objective before the first sweep followed by its value after every sweep.
    pub objective_trace: Vec<f64>,
    pub scaling: Option<ScalingParams>,
    pub selection: Option<LambdaSelection>,
}

#[derive(Serialize)]
struct LabeledWeight<'a> {
    label: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct LassoFitJson<'a> {
    intercept: f64,
    coefficients: Vec<LabeledWeight<'a>>,
    lambda: f64,
    budget: f64,
    converged: bool,
    sweeps_used: usize,
    objective: f64,
}

impl LassoFit {
    pub fn weights(&self) -> Vec<(String, f64)> {
        self.labels.iter().cloned().zip(self.coefficients.iter().copied()).collect()
    }

    pub fn weight(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|j| self.coefficients[j])
    }

    /// Intercept and coefficients expressed in the units of the raw features.
    pub fn original_scale(&self) -> (f64, Vec<f64>) {
        match &self.scaling {
            None => (self.intercept, self.coefficients.clone()),
            Some(s) => {
                let coef: Vec<f64> = self.coefficients.iter().zip(&s.std_devs).map(|(b, sd)| b / sd).collect();
                let shift: f64 = coef.iter().zip(&s.means).map(|(b, m)| b * m).sum();
                (self.intercept - shift, coef)
            }
        }
    }

    pub fn predict(&self, x: &DesignMatrix) -> Result<Vec<f64>> {
        if x.labels() != self.labels.as_slice() {
            return Err(Error::Input("prediction columns do not match fitted columns".into()));
        }
        let (alpha, beta) = self.original_scale();
        Ok((0..x.rows()).map(|i| alpha + dot(&beta, x.values().row(i))).collect())
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json(&LassoFitJson {
            intercept: self.intercept,
            coefficients: self
                .labels
                .iter()
                .zip(&self.coefficients)
                .map(|(label, &weight)| LabeledWeight { label, weight })
                .collect(),
            lambda: self.lambda,
            budget: self.budget,
            converged: self.converged,
            sweeps_used: self.sweeps_used,
            objective: self.objective,
        })
    }

    /// `label,weight` rows for bar charts.
    pub fn weights_csv(&self) -> String {
        let mut out = String::from("label,weight\n");
        for (l, w) in self.labels.iter().zip(&self.coefficients) {
            out.push_str(&format!("{l},{}\n", crate::report::fmt6(*w)));
        }
        out
    }
}

/// `sign(z) * max(|z| - t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Centered (optionally standardized) columns and target.
struct Prepared {
    columns: Vec<Vec<f64>>,
    sq_norms: Vec<f64>,
    y_centered: Vec<f64>,
    y_mean: f64,
    x_means: Vec<f64>,
    scaling: Option<ScalingParams>,
}

impl Prepared {
    fn new(x: &DesignMatrix, y: &[f64], standardize: bool) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Input(format!("{} design rows but {} targets", x.rows(), y.len())));
        }
        if y.len() < 2 {
            return Err(Error::Input("LASSO needs at least 2 rows".into()));
        }
        x.ensure_finite()?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("target contains non-finite values".into()));
        }
        let scaling = if standardize { Some(ScalingParams::fit(x)?) } else { None };
        let mut columns = x.values().columns();
        let mut x_means = Vec::with_capacity(columns.len());
        for (j, col) in columns.iter_mut().enumerate() {
            let m = mean(col);
            let sd = scaling.as_ref().map_or(1.0, |s| s.std_devs[j]);
            for v in col.iter_mut() {
                *v = (*v - m) / sd;
            }
            x_means.push(if scaling.is_some() { 0.0 } else { m });
        }
        let sq_norms = columns.iter().map(|c| dot(c, c)).collect();
        let y_mean = mean(y);
        Ok(Self {
            columns,
            sq_norms,
            y_centered: y.iter().map(|v| v - y_mean).collect(),
            y_mean,
            x_means,
            scaling,
        })
    }

    fn lambda_max(&self) -> f64 {
        self.columns
            .iter()
            .map(|c| 2.0 * dot(c, &self.y_centered).abs())
            .fold(0.0, f64::max)
    }

    fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.y_centered.clone();
        for (c, &b) in self.columns.iter().zip(beta) {
            if b != 0.0 {
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri -= b * ci;
                }
            }
        }
        r
    }

    fn intercept(&self, beta: &[f64]) -> f64 {
        self.y_mean - dot(beta, &self.x_means)
    }
}

struct Descent {
    beta: Vec<f64>,
    sweeps: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn objective(residual: &[f64], beta: &[f64], lambda: f64) -> f64 {
    dot(residual, residual) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

fn coordinate_descent(prep: &Prepared, lambda: f64, mut beta: Vec<f64>, tolerance: f64, max_sweeps: usize) -> Result<Descent> {
    let mut r = prep.residual(&beta);
    let mut trace = vec![objective(&r, &beta, lambda)];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for (j, col) in prep.columns.iter().enumerate() {
            let norm = prep.sq_norms[j];
            let old = beta[j];
            let new = if norm == 0.0 {
                0.0
            } else {
                let rho = dot(col, &r) + norm * old;
                soft_threshold(2.0 * rho, lambda) / (2.0 * norm)
            };
            let delta = new - old;
            if delta != 0.0 {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri -= delta * ci;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        let obj = objective(&r, &beta, lambda);
        let prev = *trace.last().expect("trace starts non-empty");
        if !obj.is_finite() {
            return Err(Error::Invariant("LASSO objective became non-finite".into()));
        }
        if obj > prev + 1e-12 * prev.abs().max(1.0) {
            return Err(Error::Invariant(format!(
                "LASSO objective increased from {prev} to {obj} in sweep {sweeps}"
            )));
        }
        trace.push(obj);
        if max_change < tolerance {
            converged = true;
            break;
        }
    }
    Ok(Descent {
        beta,
        sweeps,
        converged,
        trace,
    })
}

fn finish(x: &DesignMatrix, prep: Prepared, lambda: f64, d: Descent, selection: Option<LambdaSelection>) -> LassoFit {
    let objective = *d.trace.last().expect("trace starts non-empty");
    LassoFit {
        labels: x.labels().to_vec(),
        intercept: prep.intercept(&d.beta),
        budget: d.beta.iter().map(|b| b.abs()).sum(),
        coefficients: d.beta,
        lambda,
        sweeps_used: d.sweeps,
        converged: d.converged,
        objective,
        objective_trace: d.trace,
        scaling: prep.scaling,
        selection,
    }
}

/// Fits the L1-penalized regression of `y` on `x`.
///
/// When `cfg.lambda` is `None` the penalty is chosen by [`select_lambda`] and
/// the final model is refit on all rows. Coefficients start at zero and are
/// updated in column order.
pub fn fit_lasso(x: &DesignMatrix, y: &[f64], cfg: &LassoConfig) -> Result<LassoFit> {
    cfg.validate()?;
    let prep = Prepared::new(x, y, cfg.standardize_features)?;
    let (lambda, selection) = match cfg.lambda {
        Some(l) => (l, None),
        None => {
            let sel = select_lambda(x, y, cfg)?;
            let chosen = sel.path[sel.best_index].0 * y.len() as f64 / sel.train_rows as f64;
            (chosen, Some(sel))
        }
    };
    let descent = coordinate_descent(&prep, lambda, vec![0.0; x.cols()], cfg.tolerance, cfg.max_sweeps)?;
    Ok(finish(x, prep, lambda, descent, selection))
}

/// Smallest penalty whose solution is all zeros: `2 max_j |x~_j^T (y - mean(y))|`.
pub fn lambda_max(x: &DesignMatrix, y: &[f64], standardize_features: bool) -> Result<f64> {
    Ok(Prepared::new(x, y, standardize_features)?.lambda_max())
}

/// Log-spaced grid from `lambda_max` down to `lambda_max * SELECTION_GRID_RATIO`.
pub fn lambda_grid(lambda_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lambda_max];
    }
    (0..points)
        .map(|i| lambda_max * SELECTION_GRID_RATIO.powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Chooses lambda by fitting on the first 80% of rows and scoring mean squared
/// error on the remaining rows, over a 50-point log grid. Ties keep the larger
/// lambda. Lambdas in the returned path refer to the training block; since the
/// objective is an unnormalized sum, [`fit_lasso`] rescales the winner by
/// `n / train_rows` before refitting on all rows.
pub fn select_lambda(x: &DesignMatrix, y: &[f64], cfg: &LassoConfig) -> Result<LambdaSelection> {
    let n = y.len();
    if x.rows() != n {
        return Err(Error::Input(format!("{} design rows but {n} targets", x.rows())));
    }
    let head = split_point(n, SELECTION_TRAIN_FRACTION)?;
    if head < 2 {
        return Err(Error::Split(format!("lambda selection needs more rows than {n}")));
    }
    let train_x = crate::timeseries::RowSlice::slice_rows(x, 0, head);
    let valid_x = crate::timeseries::RowSlice::slice_rows(x, head, n);
    let prep = Prepared::new(&train_x, &y[..head], cfg.standardize_features)?;
    let lmax = prep.lambda_max();
    let grid = if lmax > 0.0 {
        lambda_grid(lmax, SELECTION_GRID_POINTS)
    } else {
        vec![0.0]
    };

    let mut beta = vec![0.0; x.cols()];
    let mut path = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        // warm start along the decreasing grid
        let d = coordinate_descent(&prep, lambda, beta, cfg.tolerance, cfg.max_sweeps)?;
        beta = d.beta;
        let fit = LassoFit {
            labels: x.labels().to_vec(),
            intercept: prep.intercept(&beta),
            coefficients: beta.clone(),
            lambda,
            budget: 0.0,
            sweeps_used: 0,
            converged: d.converged,
            objective: 0.0,
            objective_trace: Vec::new(),
            scaling: prep.scaling.clone(),
            selection: None,
        };
        let pred = fit.predict(&valid_x)?;
        let mse = y[head..].iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (n - head) as f64;
        path.push((lambda, mse));
    }
    let best_index = path
        .iter()
        .enumerate()
        .fold(0, |best, (i, &(_, mse))| if mse < path[best].1 { i } else { best });
    Ok(LambdaSelection {
        train_rows: head,
        validation_rows: n - head,
        path,
        best_index,
    })
}

/// LASSO of the `target` column on every other panel column, weights in panel order.
pub fn influence_weights(panel: &AlignedPanel, target: &str, cfg: &LassoConfig) -> Result<LassoFit> {
    let t = panel
        .labels()
        .iter()
        .position(|l| l == target)
        .ok_or_else(|| Error::Input(format!("target '{target}' is not a panel column")))?;
    let (labels, columns): (Vec<String>, Vec<Vec<f64>>) = panel
        .labels()
        .iter()
        .zip(panel.columns())
        .enumerate()
        .filter(|(i, _)| *i != t)
        .map(|(_, (l, c))| (l.clone(), c.clone()))
        .unzip();
    if labels.is_empty() {
        return Err(Error::Input("influence weights need at least one predictor column".into()));
    }
    let x = DesignMatrix::from_columns(labels, &columns)?;
    fit_lasso(&x, &panel.columns()[t], cfg)
}
