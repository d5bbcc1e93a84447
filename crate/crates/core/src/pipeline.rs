//! Featurizer + model bundles: fitting on a corpus and predicting on names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boosted_trees::{gbt_fit, gbt_grid, BoostedModel};
use crate::char_lstm::{self, LstmNetwork, TrainConfig, TrainReport};
use crate::classifier::Classifier;
use crate::cli::RunConfig;
use crate::corpus::synthetic::{MAX_FIRST_LEN, MAX_FULL_LEN};
use crate::corpus::{first_name, normalize_name, Corpus, Gender};
use crate::error::{Error, Result};
use crate::features::{
    chi2_scores, extract_basic, select_top_k, CharIndexer, Chi2Selector, FeatureMatrix, NgramVocabulary,
    OneHotEncoder, PaddedSequence, MAX_N, MIN_N,
};
use crate::linear_models::{
    grid_search, logreg_fit, logreg_grid, nb_fit, write_report, Hyperparameters, LogisticModel, LogisticParams,
    NaiveBayesModel,
};
use crate::seed;

/// Which part of a name the pipeline sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Full,
    First,
}

impl Variant {
    /// Default sequence length for the char-LSTM.
    pub fn max_len(self) -> usize {
        match self {
            Variant::Full => MAX_FULL_LEN,
            Variant::First => MAX_FIRST_LEN,
        }
    }

    /// Projection of a normalized full name.
    pub fn view(self, normalized: &str) -> &str {
        match self {
            Variant::Full => normalized,
            Variant::First => first_name(normalized),
        }
    }

    pub fn apply(self, corpus: &Corpus) -> Corpus {
        match self {
            Variant::Full => corpus.clone(),
            Variant::First => corpus.first_names(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::First => "first",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "first" => Ok(Variant::First),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}` (expected full or first)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureSpec {
    Basic,
    Ngram(usize),
    Chars,
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSpec::Basic => f.write_str("basic"),
            FeatureSpec::Ngram(n) => write!(f, "ngram:{n}"),
            FeatureSpec::Chars => f.write_str("chars"),
        }
    }
}

impl FromStr for FeatureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(FeatureSpec::Basic),
            "chars" => Ok(FeatureSpec::Chars),
            _ => {
                let n = s
                    .strip_prefix("ngram:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown features `{s}` (expected basic, ngram:N or chars)"))
                    })?;
                if !(MIN_N..=MAX_N).contains(&n) {
                    return Err(Error::InvalidN(n));
                }
                Ok(FeatureSpec::Ngram(n))
            }
        }
    }
}

impl TryFrom<String> for FeatureSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureSpec> for String {
    fn from(f: FeatureSpec) -> String {
        f.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nb,
    Logreg,
    Gbt,
    Lstm,
}

impl Method {
    /// Report label.
    pub fn label(self) -> &'static str {
        match self {
            Method::Nb => "nb",
            Method::Logreg => "logreg",
            Method::Gbt => "gbt",
            Method::Lstm => "lstm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" => Ok(Method::Nb),
            "logreg" => Ok(Method::Logreg),
            "gbt" => Ok(Method::Gbt),
            "lstm" => Ok(Method::Lstm),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method `{s}` (expected nb, logreg, gbt or lstm)"
            ))),
        }
    }
}

/// `lstm` takes `chars`; every other method takes `basic` or `ngram:N`.
pub fn check_pair(method: Method, features: FeatureSpec) -> Result<()> {
    let ok = match method {
        Method::Lstm => features == FeatureSpec::Chars,
        _ => features != FeatureSpec::Chars,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IncompatiblePair {
            method: method.to_string(),
            features: features.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Featurizer {
    Basic { encoder: OneHotEncoder },
    Ngram { vocabulary: NgramVocabulary, selector: Chi2Selector },
    Chars { indexer: CharIndexer },
}

impl Featurizer {
    pub fn spec(&self) -> FeatureSpec {
        match self {
            Featurizer::Basic { .. } => FeatureSpec::Basic,
            Featurizer::Ngram { vocabulary, .. } => FeatureSpec::Ngram(vocabulary.n()),
            Featurizer::Chars { .. } => FeatureSpec::Chars,
        }
    }

    /// Output column names; empty for character sequences.
    pub fn column_names(&self) -> Vec<String> {
        match self {
            Featurizer::Basic { encoder } => encoder.column_names(),
            Featurizer::Ngram { vocabulary, selector } => {
                let grams = vocabulary.grams();
                selector.selected.iter().map(|&j| grams[j].clone()).collect()
            }
            Featurizer::Chars { .. } => Vec::new(),
        }
    }

    /// Fit a count featurizer and return it with the training matrix.
    pub fn fit_tabular(spec: FeatureSpec, names: &[&str], labels: &[Gender], top_k: usize) -> Result<(Self, FeatureMatrix)> {
        match spec {
            FeatureSpec::Basic => {
                let values: Vec<_> = names.iter().map(|n| extract_basic(n)).collect();
                let encoder = OneHotEncoder::fit(&values)?;
                let x = encoder.transform_names(names);
                Ok((Featurizer::Basic { encoder }, x))
            }
            FeatureSpec::Ngram(n) => {
                let vocabulary = NgramVocabulary::fit(names, n)?;
                let counts = vocabulary.vectorize_many(names);
                let selector = select_top_k(&chi2_scores(&counts, labels)?, top_k);
                let x = selector.transform(&counts);
                Ok((Featurizer::Ngram { vocabulary, selector }, x))
            }
            FeatureSpec::Chars => Err(Error::InvalidArgument("chars features produce sequences, not a matrix".into())),
        }
    }

    /// Feature matrix for names already in the pipeline's view.
    pub fn transform(&self, names: &[&str]) -> Result<FeatureMatrix> {
        match self {
            Featurizer::Basic { encoder } => Ok(encoder.transform_names(names)),
            Featurizer::Ngram { vocabulary, selector } => Ok(selector.transform(&vocabulary.vectorize_many(names))),
            Featurizer::Chars { .. } => Err(Error::WrongModelKind {
                expected: "tabular featurizer",
                found: "chars".into(),
            }),
        }
    }

    pub fn sequences(&self, names: &[&str]) -> Result<Vec<PaddedSequence>> {
        match self {
            Featurizer::Chars { indexer } => names.iter().map(|n| indexer.index_and_pad(n)).collect(),
            other => Err(Error::WrongModelKind {
                expected: "chars featurizer",
                found: other.spec().to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    NaiveBayes(NaiveBayesModel),
    Logistic(LogisticModel),
    Boosted(BoostedModel),
    CharLstm(LstmNetwork),
}

impl Model {
    pub fn method(&self) -> Method {
        match self {
            Model::NaiveBayes(_) => Method::Nb,
            Model::Logistic(_) => Method::Logreg,
            Model::Boosted(_) => Method::Gbt,
            Model::CharLstm(_) => Method::Lstm,
        }
    }

    fn tabular(&self) -> Option<&dyn Classifier> {
        match self {
            Model::NaiveBayes(m) => Some(m),
            Model::Logistic(m) => Some(m),
            Model::Boosted(m) => Some(m),
            Model::CharLstm(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub variant: Variant,
    pub featurizer: Featurizer,
    pub model: Model,
}

impl Pipeline {
    /// P(male) for normalized full names; the variant view is applied here.
    pub fn predict_names(&self, names: &[&str]) -> Result<Vec<f64>> {
        let viewed: Vec<&str> = names.iter().map(|n| self.variant.view(n)).collect();
        match &self.model {
            Model::CharLstm(net) => net.predictor().predict_many(&self.featurizer.sequences(&viewed)?),
            model => {
                let x = self.featurizer.transform(&viewed)?;
                model.tabular().expect("non-lstm model").predict_proba_matrix(&x)
            }
        }
    }

    /// Normalizes a raw name, then predicts P(male).
    pub fn predict_raw(&self, raw: &str) -> Result<f64> {
        let normalized = normalize_name(raw)?;
        Ok(self.predict_names(&[&normalized])?[0])
    }

    /// The network and indexer, for char-LSTM pipelines.
    pub fn char_lstm(&self) -> Result<(&LstmNetwork, &CharIndexer)> {
        match (&self.model, &self.featurizer) {
            (Model::CharLstm(net), Featurizer::Chars { indexer }) => Ok((net, indexer)),
            (model, _) => Err(Error::WrongModelKind {
                expected: "char-LSTM",
                found: model.method().to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub pipeline: Pipeline,
    /// Per-epoch metrics, for char-LSTM fits.
    pub lstm_report: Option<TrainReport>,
    /// Grid-search CSV, when `config.tune` is set for logreg or gbt.
    pub grid_report: Option<String>,
}

fn report_csv<P: Hyperparameters>(candidates: &[crate::linear_models::CandidateScore<P>], best: usize) -> Result<String> {
    let mut buf = Vec::new();
    write_report(candidates, best, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn train_config(config: &RunConfig) -> TrainConfig {
    TrainConfig {
        embed_dim: config.embed,
        hidden: config.hidden,
        batch_size: config.batch,
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        seed: seed::derive(config.seed, "lstm"),
    }
}

/// Fit the configured featurizer and model on `train` (normalized full
/// names). `held_out` only feeds per-epoch test accuracy of the char-LSTM.
pub fn fit_pipeline(train: &Corpus, config: &RunConfig, held_out: Option<&Corpus>) -> Result<FitOutcome> {
    check_pair(config.method, config.features)?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training corpus is empty"));
    }
    let variant = config.variant;
    let names: Vec<&str> = train.names().into_iter().map(|n| variant.view(n)).collect();
    let labels = train.labels();

    if config.method == Method::Lstm {
        let longest = names.iter().map(|n| n.chars().count()).max().unwrap_or(0);
        let max_len = config.max_len.unwrap_or_else(|| variant.max_len().max(longest));
        let indexer = CharIndexer::fit(&names, Some(max_len), config.unknown_bucket)?;
        let seqs = names
            .iter()
            .map(|n| indexer.index_and_pad(n))
            .collect::<Result<Vec<_>>>()?;
        let held = match held_out {
            Some(c) => {
                let hn: Vec<&str> = c.names().into_iter().map(|n| variant.view(n)).collect();
                let hs = hn
                    .iter()
                    .map(|n| indexer.index_and_pad(n))
                    .collect::<Result<Vec<_>>>()?;
                Some((hs, c.labels()))
            }
            None => None,
        };
        let mut rng = seed::component_rng(config.seed, "lstm-init");
        let mut net = LstmNetwork::init(indexer.embedding_rows(), config.embed, config.hidden, &mut rng);
        let report = char_lstm::train(
            &mut net,
            &seqs,
            &labels,
            &train_config(config),
            held.as_ref().map(|(s, l)| (&s[..], &l[..])),
        )?;
        return Ok(FitOutcome {
            pipeline: Pipeline {
                variant,
                featurizer: Featurizer::Chars { indexer },
                model: Model::CharLstm(net),
            },
            lstm_report: Some(report),
            grid_report: None,
        });
    }

    let (featurizer, x) = Featurizer::fit_tabular(config.features, &names, &labels, config.top_k)?;
    let cv_seed = seed::derive(config.seed, "cv");
    let (model, grid_report) = match config.method {
        Method::Nb => (Model::NaiveBayes(nb_fit(&x, &labels, config.alpha)?), None),
        Method::Logreg if config.tune => {
            let grid: Vec<LogisticParams> = logreg_grid()
                .into_iter()
                .map(|p| LogisticParams {
                    tol: config.tol,
                    max_iter: config.max_iter,
                    ..p
                })
                .collect();
            let r = grid_search(&grid, |p, x, y| logreg_fit(x, y, p), &x, &labels, config.folds, cv_seed)?;
            let csv = report_csv(&r.candidates, r.best_index)?;
            (Model::Logistic(r.best_model), Some(csv))
        }
        Method::Logreg => (Model::Logistic(logreg_fit(&x, &labels, &config.logistic_params())?), None),
        Method::Gbt if config.tune => {
            let r = grid_search(
                &gbt_grid(&config.gbt),
                |p, x, y| gbt_fit(x, y, p),
                &x,
                &labels,
                config.folds,
                cv_seed,
            )?;
            let csv = report_csv(&r.candidates, r.best_index)?;
            (Model::Boosted(r.best_model), Some(csv))
        }
        Method::Gbt => (Model::Boosted(gbt_fit(&x, &labels, &config.gbt)?), None),
        Method::Lstm => unreachable!("handled above"),
    };
    Ok(FitOutcome {
        pipeline: Pipeline {
            variant,
            featurizer,
            model,
        },
        lstm_report: None,
        grid_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synthetic::generate_synthetic;

    #[test]
    fn pairing_rules() {
        assert!(check_pair(Method::Nb, FeatureSpec::Ngram(3)).is_ok());
        assert!(check_pair(Method::Lstm, FeatureSpec::Chars).is_ok());
        assert!(matches!(
            check_pair(Method::Lstm, FeatureSpec::Ngram(3)),
            Err(Error::IncompatiblePair { .. })
        ));
        assert!(check_pair(Method::Gbt, FeatureSpec::Chars).is_err());
    }

    #[test]
    fn feature_spec_parsing() {
        assert_eq!("ngram:4".parse::<FeatureSpec>().unwrap(), FeatureSpec::Ngram(4));
        assert_eq!(FeatureSpec::Ngram(4).to_string(), "ngram:4");
        assert!(matches!("ngram:6".parse::<FeatureSpec>(), Err(Error::InvalidN(6))));
        assert!("ngram:x".parse::<FeatureSpec>().is_err());
        assert!("words".parse::<FeatureSpec>().is_err());
    }

    #[test]
    fn first_name_view() {
        assert_eq!(Variant::First.view("budi santoso"), "budi");
        assert_eq!(Variant::Full.view("budi santoso"), "budi santoso");
        assert_eq!(Variant::First.max_len(), 17);
        assert_eq!(Variant::Full.max_len(), 56);
    }

    #[test]
    fn tabular_pipeline_predicts_in_unit_interval() {
        let corpus = generate_synthetic(200, 0.6656, 3).unwrap();
        for (method, features) in [
            (Method::Nb, FeatureSpec::Basic),
            (Method::Logreg, FeatureSpec::Ngram(2)),
            (Method::Gbt, FeatureSpec::Ngram(3)),
        ] {
            let config = RunConfig {
                method,
                features,
                ..RunConfig::default()
            };
            let fit = fit_pipeline(&corpus, &config, None).unwrap();
            let probs = fit.pipeline.predict_names(&corpus.names()).unwrap();
            assert_eq!(probs.len(), corpus.len());
            assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn lstm_pipeline_uses_variant_length() {
        let corpus = generate_synthetic(40, 0.6656, 4).unwrap();
        let config = RunConfig {
            variant: Variant::First,
            embed: 4,
            hidden: 4,
            epochs: 1,
            ..RunConfig::default()
        };
        let fit = fit_pipeline(&corpus, &config, None).unwrap();
        let (_, indexer) = fit.pipeline.char_lstm().unwrap();
        assert_eq!(indexer.max_len(), 17);
        assert_eq!(fit.lstm_report.unwrap().epochs.len(), 1);
    }
}
