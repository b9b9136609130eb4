use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::timeseries::RowSlice;

/// Numeric feature matrix with one label per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    values: Matrix,
    labels: Vec<String>,
}

impl DesignMatrix {
    pub fn new(values: Matrix, labels: Vec<String>) -> Result<Self> {
        if values.cols() != labels.len() {
            return Err(Error::Input(format!(
                "{} column labels for {} columns",
                labels.len(),
                values.cols()
            )));
        }
        Ok(Self { values, labels })
    }

    /// Builds a design matrix with labels `x1..xp`.
    pub fn unlabeled(values: Matrix) -> Self {
        let labels = (1..=values.cols()).map(|j| format!("x{j}")).collect();
        Self { values, labels }
    }

    pub fn from_columns(labels: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_columns(columns)?, labels)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j)
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Keeps only the columns at `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> DesignMatrix {
        let mut values = Matrix::zeros(self.rows(), indices.len());
        for i in 0..self.rows() {
            let src = self.values.row(i);
            for (dst, &j) in values.row_mut(i).iter_mut().zip(indices) {
                *dst = src[j];
            }
        }
        DesignMatrix {
            values,
            labels: indices.iter().map(|&j| self.labels[j].clone()).collect(),
        }
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.values.is_finite() {
            Ok(())
        } else {
            Err(Error::Input("design matrix contains non-finite values".into()))
        }
    }
}

impl RowSlice for DesignMatrix {
    fn row_count(&self) -> usize {
        self.rows()
    }

    fn slice_rows(&self, start: usize, end: usize) -> Self {
        DesignMatrix {
            values: self.values.slice_rows(start, end),
            labels: self.labels.clone(),
        }
    }
}
