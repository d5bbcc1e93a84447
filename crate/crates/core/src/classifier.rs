use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// A fitted binary classifier over feature rows. Probabilities are P(male).
pub trait Classifier {
    fn width(&self) -> usize;

    fn predict_proba(&self, row: &[f64]) -> Result<f64>;

    fn predict_proba_matrix(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.iter_rows().map(|r| self.predict_proba(r)).collect()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// ln(1 + e^z) without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn check_width(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::WidthMismatch { expected, got })
    }
}

pub(crate) fn check_labels(x: &FeatureMatrix, y: &[Gender]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::LabelMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    let males = y.iter().filter(|g| g.is_male()).count();
    if males == 0 || males == y.len() {
        return Err(Error::SingleClassInput);
    }
    Ok(())
}
