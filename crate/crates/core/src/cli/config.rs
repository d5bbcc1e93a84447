use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boosted_trees::GbtParams;
use crate::error::{Error, Result};
use crate::features::DEFAULT_K;
use crate::linear_models::{LogisticParams, Penalty, DEFAULT_ALPHA, DEFAULT_FOLDS};
use crate::pipeline::{FeatureSpec, Method, Variant};

/// Every tunable of a run. Missing keys take the defaults below; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; split, CV folds, LSTM init and shuffling derive from it.
    pub seed: u64,
    pub variant: Variant,
    pub method: Method,
    pub features: FeatureSpec,
    /// Held-out fraction of the stratified split.
    pub test_fraction: f64,
    /// Cross-validation folds for grid search.
    pub folds: usize,
    /// Run the hyperparameter grid before the final logreg/gbt fit.
    pub tune: bool,
    /// χ² top-k for n-gram features.
    pub top_k: usize,
    /// Naive Bayes smoothing.
    pub alpha: f64,
    pub penalty: Penalty,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub gbt: GbtParams,
    pub embed: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Sequence length; unset means 56 (full) or 17 (first), grown to the
    /// longest training name if needed.
    pub max_len: Option<usize>,
    /// Reserve an index for characters unseen in training.
    pub unknown_bucket: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let logistic = LogisticParams::default();
        Self {
            seed: 0,
            variant: Variant::Full,
            method: Method::Lstm,
            features: FeatureSpec::Chars,
            test_fraction: 0.2,
            folds: DEFAULT_FOLDS,
            tune: false,
            top_k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            penalty: logistic.penalty,
            c: logistic.c,
            tol: logistic.tol,
            max_iter: logistic.max_iter,
            gbt: GbtParams::default(),
            embed: 64,
            hidden: 64,
            epochs: 20,
            batch: 32,
            learning_rate: 0.001,
            max_len: None,
            unknown_bucket: false,
        }
    }
}

impl RunConfig {
    pub fn logistic_params(&self) -> LogisticParams {
        LogisticParams {
            penalty: self.penalty,
            c: self.c,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"epochz": 3}"#), Err(Error::Json(_))));
        assert!(RunConfig::from_json(r#"{"gbt": {"depth": 3}}"#).is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::from_json(r#"{"method": "gbt", "features": "ngram:3", "gbt": {"max_depth": 3}}"#).unwrap();
        assert_eq!(c.method, Method::Gbt);
        assert_eq!(c.features, FeatureSpec::Ngram(3));
        assert_eq!(c.gbt.max_depth, 3);
        assert_eq!(c.gbt.eta, 0.3);
        assert_eq!(c.epochs, 20);
        assert_eq!(c.batch, 32);
    }

    #[test]
    fn json_round_trip() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }
}
