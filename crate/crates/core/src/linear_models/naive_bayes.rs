//! Multinomial Naive Bayes with additive (Laplace) smoothing.

use serde::{Deserialize, Serialize};

use crate::classifier::{check_labels, check_width, Classifier};
use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Class index 0 is female, 1 is male.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub alpha: f64,
    pub log_priors: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
}

pub fn nb_fit(x: &FeatureMatrix, y: &[Gender], alpha: f64) -> Result<NaiveBayesModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidHyperparameter(format!(
            "smoothing alpha must be positive, got {alpha}"
        )));
    }
    check_labels(x, y)?;
    x.check_nonnegative()?;
    let f = x.cols();
    let mut counts = [vec![0.0; f], vec![0.0; f]];
    let mut class_n = [0usize; 2];
    for (row, g) in x.iter_rows().zip(y) {
        let c = g.is_male() as usize;
        class_n[c] += 1;
        for (acc, v) in counts[c].iter_mut().zip(row) {
            *acc += v;
        }
    }
    let n = y.len() as f64;
    let log_priors = class_n.map(|k| (k as f64 / n).ln());
    let feature_log_prob = counts.map(|cnt| {
        let denom = (cnt.iter().sum::<f64>() + alpha * f as f64).ln();
        cnt.iter().map(|&c| (c + alpha).ln() - denom).collect()
    });
    Ok(NaiveBayesModel {
        alpha,
        log_priors,
        feature_log_prob,
    })
}

impl NaiveBayesModel {
    /// Unnormalized per-class log scores `[female, male]`.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> Result<[f64; 2]> {
        check_width(self.width(), row.len())?;
        Ok(std::array::from_fn(|c| {
            self.log_priors[c]
                + row
                    .iter()
                    .zip(&self.feature_log_prob[c])
                    .map(|(x, lp)| if *x == 0.0 { 0.0 } else { x * lp })
                    .sum::<f64>()
        }))
    }
}

impl Classifier for NaiveBayesModel {
    fn width(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        let [female, male] = self.joint_log_likelihood(row)?;
        let top = female.max(male);
        let (ef, em) = ((female - top).exp(), (male - top).exp());
        Ok(em / (ef + em))
    }
}
