//! Chi-squared feature scoring and top-k selection.
//!
//! Uses the observed-sum convention: for feature `f` and class `c`,
//! `O[c] = Σ_{i in c} X[i,f]` and `E[c] = (Σ_i X[i,f]) · n_c / N`.

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::corpus::Gender;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 1000;

pub fn chi2_scores(x: &FeatureMatrix, y: &[Gender]) -> Result<Vec<f64>> {
    if x.rows() != y.len() {
        return Err(Error::LabelMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    x.check_nonnegative()?;
    let n = y.len() as f64;
    let n_male = y.iter().filter(|g| g.is_male()).count() as f64;
    let prior = [(n - n_male) / n, n_male / n];

    // observed[class][feature]
    let mut observed = [vec![0.0; x.cols()], vec![0.0; x.cols()]];
    for (row, g) in x.iter_rows().zip(y) {
        let obs = &mut observed[g.is_male() as usize];
        for (o, v) in obs.iter_mut().zip(row) {
            *o += v;
        }
    }
    let scores = (0..x.cols())
        .map(|f| {
            let total = observed[0][f] + observed[1][f];
            if total == 0.0 {
                return 0.0;
            }
            (0..2)
                .filter(|&c| prior[c] > 0.0)
                .map(|c| {
                    let e = total * prior[c];
                    (observed[c][f] - e).powi(2) / e
                })
                .sum()
        })
        .collect();
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Selector {
    pub k: usize,
    /// Selected columns in ascending column order.
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Keep the `k` highest-scoring columns; ties go to the lower column index.
pub fn select_top_k(scores: &[f64], k: usize) -> Chi2Selector {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k.min(scores.len()));
    order.sort_unstable();
    Chi2Selector {
        k,
        selected: order,
        scores: scores.to_vec(),
    }
}

impl Chi2Selector {
    pub fn transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        x.select_columns(&self.selected)
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.selected.iter().map(|&j| row[j]).collect()
    }
}
