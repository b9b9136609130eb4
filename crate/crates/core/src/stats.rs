//! Column standardization and Pearson correlation.
//!
//! Variances and covariances use the sample (n - 1) denominator everywhere,
//! which keeps `pearson` consistent with the PCA covariance matrix.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::matrix::{mean, Matrix};
use crate::report::fmt6;
use crate::timeseries::AlignedPanel;

/// Per-column location and scale removed by [`standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

impl ScalingParams {
    /// Fits means and sample standard deviations; errors on constant columns.
    pub fn fit(x: &DesignMatrix) -> Result<Self> {
        let mut means = Vec::with_capacity(x.cols());
        let mut std_devs = Vec::with_capacity(x.cols());
        for j in 0..x.cols() {
            let col = x.column(j);
            let m = mean(&col);
            let sd = sample_variance_about(&col, m).sqrt();
            if is_degenerate(sd, m) {
                return Err(Error::DegenerateColumn(x.labels()[j].clone()));
            }
            means.push(m);
            std_devs.push(sd);
        }
        Ok(Self { means, std_devs })
    }

    pub fn apply(&self, x: &DesignMatrix) -> Result<DesignMatrix> {
        self.check_width(x)?;
        let mut values = x.values().clone();
        for i in 0..values.rows() {
            for (j, v) in values.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.means[j]) / self.std_devs[j];
            }
        }
        DesignMatrix::new(values, x.labels().to_vec())
    }

    /// Exact inverse of [`ScalingParams::apply`].
    pub fn invert(&self, z: &DesignMatrix) -> Result<DesignMatrix> {
        self.check_width(z)?;
        let mut values = z.values().clone();
        for i in 0..values.rows() {
            for (j, v) in values.row_mut(i).iter_mut().enumerate() {
                *v = *v * self.std_devs[j] + self.means[j];
            }
        }
        DesignMatrix::new(values, z.labels().to_vec())
    }

    fn check_width(&self, x: &DesignMatrix) -> Result<()> {
        if x.cols() != self.means.len() {
            return Err(Error::Input(format!(
                "scaling fitted on {} columns, got {}",
                self.means.len(),
                x.cols()
            )));
        }
        Ok(())
    }
}

fn is_degenerate(sd: f64, mean: f64) -> bool {
    !(sd > 1e-14 * mean.abs().max(1.0))
}

fn sample_variance_about(v: &[f64], m: f64) -> f64 {
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Centers every column to mean 0 and scales it to sample standard deviation 1.
pub fn standardize(x: &DesignMatrix) -> Result<(DesignMatrix, ScalingParams)> {
    if x.rows() < 2 {
        return Err(Error::Input("standardization needs at least 2 rows".into()));
    }
    let params = ScalingParams::fit(x)?;
    Ok((params.apply(x)?, params))
}

/// Sample Pearson correlation, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "pearson needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Input("pearson needs at least 2 observations".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let n1 = x.len() as f64 - 1.0;
    if is_degenerate((sxx / n1).sqrt(), mx) {
        return Err(Error::DegenerateInput("first series is constant".into()));
    }
    if is_degenerate((syy / n1).sqrt(), my) {
        return Err(Error::DegenerateInput("second series is constant".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Labeled symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub labels: Vec<String>,
    pub values: Matrix,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[(i, j)])
    }

    /// Labels as header and first column, values to 6 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for v in self.values.row(i) {
                out.push(',');
                out.push_str(&fmt6(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self) -> String {
        crate::svg::heatmap(&self.labels, &self.values)
    }
}

pub fn correlation_matrix(panel: &AlignedPanel) -> Result<CorrMatrix> {
    let p = panel.labels().len();
    if p < 2 {
        return Err(Error::Input(format!(
            "correlation matrix needs at least 2 columns, got {p}"
        )));
    }
    let cols = panel.columns();
    for (l, c) in panel.labels().iter().zip(cols) {
        let m = mean(c);
        if c.len() < 2 || is_degenerate(sample_variance_about(c, m).sqrt(), m) {
            return Err(Error::DegenerateInput(format!("column '{l}' is constant")));
        }
    }
    let mut values = Matrix::identity(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let r = pearson(&cols[i], &cols[j])?;
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    Ok(CorrMatrix {
        labels: panel.labels().to_vec(),
        values,
    })
}
