//! Ordinary least squares via Householder QR, plus forecast metrics.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::matrix::{dot, mean};

/// Relative threshold on the R diagonal below which a column counts as dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub labels: Vec<String>,
}

impl OlsFit {
    pub fn predict(&self, x: &DesignMatrix) -> Result<Vec<f64>> {
        predict(self, x)
    }

    /// Residual sum of squares on `(x, y)`.
    pub fn rss(&self, x: &DesignMatrix, y: &[f64]) -> Result<f64> {
        let yhat = self.predict(x)?;
        Ok(y.iter().zip(&yhat).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

/// Householder QR of a tall matrix, stored column-wise.
struct HouseholderQr {
    /// Column j: R entries above and on the diagonal, reflector tails below it.
    cols: Vec<Vec<f64>>,
    /// Leading entries of the (unnormalized) reflectors.
    v0: Vec<f64>,
    /// 2 / (v^T v) for each reflector, 0 when the column was already zero.
    beta: Vec<f64>,
}

impl HouseholderQr {
    fn new(mut cols: Vec<Vec<f64>>) -> Self {
        let n = cols.len();
        let m = cols.first().map_or(0, Vec::len);
        let mut v0 = vec![0.0; n];
        let mut beta = vec![0.0; n];
        for k in 0..n.min(m) {
            let (done, rest) = cols.split_at_mut(k + 1);
            let ck = &mut done[k];
            let norm = dot(&ck[k..], &ck[k..]).sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if ck[k] > 0.0 { -norm } else { norm };
            // v = x - alpha e1; v[k] is kept in v0 so the tail can stay in place
            let vk = ck[k] - alpha;
            let vtv = vk * vk + dot(&ck[k + 1..], &ck[k + 1..]);
            if vtv == 0.0 {
                continue;
            }
            let b = 2.0 / vtv;
            for cj in rest.iter_mut() {
                let f = b * (vk * cj[k] + dot(&ck[k + 1..], &cj[k + 1..]));
                cj[k] -= f * vk;
                for (t, v) in cj[k + 1..].iter_mut().zip(&ck[k + 1..]) {
                    *t -= f * v;
                }
            }
            ck[k] = alpha;
            v0[k] = vk;
            beta[k] = b;
        }
        Self { cols, v0, beta }
    }

    fn r_diagonal(&self) -> Vec<f64> {
        self.cols.iter().enumerate().map(|(k, c)| c[k]).collect()
    }

    /// Overwrites `y` with Q^T y.
    fn apply_qt(&self, y: &mut [f64]) {
        for (k, ck) in self.cols.iter().enumerate().take(y.len()) {
            if self.beta[k] == 0.0 {
                continue;
            }
            let f = self.beta[k] * (self.v0[k] * y[k] + dot(&ck[k + 1..], &y[k + 1..]));
            y[k] -= f * self.v0[k];
            for (t, v) in y[k + 1..].iter_mut().zip(&ck[k + 1..]) {
                *t -= f * v;
            }
        }
    }

    fn back_substitute(&self, qty: &[f64]) -> Vec<f64> {
        let n = self.cols.len();
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = ((k + 1)..n).map(|j| self.cols[j][k] * x[j]).sum();
            x[k] = (qty[k] - s) / self.cols[k][k];
        }
        x
    }
}

/// Least-squares fit of `y` on `x` with an intercept, solved by QR of `[1 | x]`.
pub fn fit_ols(x: &DesignMatrix, y: &[f64]) -> Result<OlsFit> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::Input(format!("{n} design rows but {} targets", y.len())));
    }
    if n < p + 1 {
        return Err(Error::Input(format!(
            "OLS needs at least {} rows for {p} columns plus intercept, got {n}",
            p + 1
        )));
    }
    x.ensure_finite()?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("target contains non-finite values".into()));
    }

    let mut columns = Vec::with_capacity(p + 1);
    columns.push(vec![1.0; n]);
    columns.extend(x.values().columns());
    let qr = HouseholderQr::new(columns);
    let diag = qr.r_diagonal();
    let max_r = diag.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if let Some(k) = diag.iter().position(|r| !(r.abs() >= RANK_TOLERANCE * max_r) || max_r == 0.0) {
        let column = if k == 0 {
            "intercept".to_string()
        } else {
            x.labels()[k - 1].clone()
        };
        return Err(Error::Rank { column });
    }
    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);
    let beta = qr.back_substitute(&qty[..p + 1]);
    let fit = OlsFit {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        labels: x.labels().to_vec(),
    };
    if !fit.intercept.is_finite() || fit.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Invariant("OLS produced non-finite coefficients".into()));
    }
    Ok(fit)
}

pub fn predict(fit: &OlsFit, x: &DesignMatrix) -> Result<Vec<f64>> {
    if x.labels() != fit.labels.as_slice() {
        return Err(Error::Input(format!(
            "prediction columns [{}] do not match fitted columns [{}]",
            x.labels().join(", "),
            fit.labels.join(", ")
        )));
    }
    Ok((0..x.rows())
        .map(|i| fit.intercept + dot(&fit.coefficients, x.values().row(i)))
        .collect())
}

/// Error magnitudes that stay defined even when the target is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
}

pub fn error_metrics(y: &[f64], yhat: &[f64]) -> Result<ErrorMetrics> {
    if y.len() != yhat.len() {
        return Err(Error::Input(format!(
            "{} actual values but {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::Input("metrics need at least 2 observations".into()));
    }
    let n = y.len() as f64;
    let mse = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    let mae = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
    Ok(ErrorMetrics {
        mse,
        rmse: mse.sqrt(),
        mae,
    })
}

/// MSE, RMSE, MAE and R² = 1 - SS_res / SS_tot. Errors when `y` is constant.
pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<MetricsReport> {
    let e = error_metrics(y, yhat)?;
    let my = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateInput("actual values are constant; r2 undefined".into()));
    }
    let ss_res = e.mse * y.len() as f64;
    Ok(MetricsReport {
        mse: e.mse,
        rmse: e.rmse,
        mae: e.mae,
        r2: 1.0 - ss_res / ss_tot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn design(cols: &[Vec<f64>]) -> DesignMatrix {
        DesignMatrix::unlabeled(Matrix::from_columns(cols).unwrap())
    }

    #[test]
    fn exact_line() {
        let x = design(&[vec![0.0, 1.0, 2.0]]);
        let fit = fit_ols(&x, &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        let yhat = fit.predict(&x).unwrap();
        for (a, b) in yhat.iter().zip([1.0, 3.0, 5.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_target() {
        let x = design(&[vec![0.0, 1.0, 2.0, 5.0], vec![1.0, -1.0, 4.0, 0.0]]);
        let fit = fit_ols(&x, &[7.0; 4]).unwrap();
        assert!((fit.intercept - 7.0).abs() < 1e-12);
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn duplicated_column_is_rank_error() {
        let c = vec![0.0, 1.0, 2.0, 4.0];
        let x = DesignMatrix::new(
            Matrix::from_columns(&[c.clone(), vec![1.0, 0.0, 1.0, 0.0], c]).unwrap(),
            vec!["a".into(), "b".into(), "a_copy".into()],
        )
        .unwrap();
        match fit_ols(&x, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::Rank { column }) => assert_eq!(column, "a_copy"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_feature_collides_with_intercept() {
        let x = design(&[vec![3.0; 4]]);
        assert!(matches!(fit_ols(&x, &[1.0, 2.0, 3.0, 4.0]), Err(Error::Rank { .. })));
    }

    #[test]
    fn too_few_rows() {
        let x = design(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(fit_ols(&x, &[1.0, 2.0]), Err(Error::Input(_))));
    }

    #[test]
    fn residuals_orthogonal_to_columns() {
        let cols = vec![
            vec![0.3, -1.2, 2.2, 0.7, 1.1, -0.4, 0.9],
            vec![1.5, 0.2, -0.7, 2.5, -1.9, 0.6, 0.1],
        ];
        let y = [1.0, -0.5, 2.0, 3.3, -1.0, 0.4, 0.8];
        let x = design(&cols);
        let fit = fit_ols(&x, &y).unwrap();
        let r: Vec<f64> = y.iter().zip(fit.predict(&x).unwrap()).map(|(a, b)| a - b).collect();
        let ynorm = dot(&y, &y).sqrt();
        assert!(r.iter().sum::<f64>().abs() < 1e-6 * ynorm);
        for c in &cols {
            assert!(dot(c, &r).abs() < 1e-6 * ynorm);
        }
    }

    #[test]
    fn zero_coefficient_fit_predicts_intercept() {
        let fit = OlsFit {
            intercept: 2.5,
            coefficients: vec![0.0, 0.0],
            labels: vec!["x1".into(), "x2".into()],
        };
        let x = design(&[vec![1.0, 9.0], vec![4.0, -3.0]]);
        assert_eq!(fit.predict(&x).unwrap(), vec![2.5, 2.5]);
        let other = DesignMatrix::new(x.values().clone(), vec!["a".into(), "b".into()]).unwrap();
        assert!(fit.predict(&other).is_err());
    }

    #[test]
    fn metric_examples() {
        let y = [1.0, 2.0, 3.0];
        let m = metrics(&y, &y).unwrap();
        assert_eq!((m.mse, m.r2), (0.0, 1.0));
        let m = metrics(&y, &[2.0, 2.0, 2.0]).unwrap();
        assert!(m.r2.abs() < 1e-15);
        let m = metrics(&y, &[1.0, 2.0, 5.0]).unwrap();
        assert!((m.mse - 4.0 / 3.0).abs() < 1e-15);
        assert!((m.mae - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.rmse - m.mse.sqrt()).abs() < 1e-12);

        assert!(matches!(metrics(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::DegenerateInput(_))));
        let e = error_metrics(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(e.mse, 0.5);
    }
}
