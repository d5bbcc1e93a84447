use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major sample × feature matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    column_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, column_names: Vec<String>) -> Self {
        let cols = column_names.len();
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            column_names,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, column_names: Vec<String>) -> Result<Self> {
        let cols = column_names.len();
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::WidthMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
            column_names,
        })
    }

    /// Columns named `x0, x1, ...`.
    pub fn from_unnamed_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, (0..cols).map(|j| format!("x{j}")).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
            column_names: self.column_names.clone(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(cols.iter().map(|&j| row[j]));
        }
        FeatureMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
            column_names: cols.iter().map(|&j| self.column_names[j].clone()).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::NegativeFeatureValue {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            if let Some(j) = self.row(i).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput { row: i, col: j });
            }
        }
        Ok(())
    }

    /// Compressed rows: `(column, value)` for every nonzero entry.
    pub fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        self.iter_rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect()
    }
}
