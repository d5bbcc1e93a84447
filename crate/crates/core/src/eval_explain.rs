//! Binary metrics with male as the positive class, experiment runs and
//! per-prefix probability traces.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::char_lstm::LstmNetwork;
use crate::cli::RunConfig;
use crate::corpus::{split, Corpus, Gender, SplitSpec};
use crate::error::{Error, Result};
use crate::features::CharIndexer;
use crate::pipeline::{fit_pipeline, FeatureSpec, FitOutcome, Method, Variant};
use crate::seed;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    /// Metrics from confusion counts; empty denominators give 0.
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            precision,
            recall,
            f1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Predicted male iff `p >= threshold`.
pub fn evaluate(predictions: &[f64], labels: &[Gender], threshold: f64) -> Result<EvalReport> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} must lie in (0, 1)")));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, g) in predictions.iter().zip(labels) {
        match (p >= threshold, g.is_male()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, tn, fn_))
}

/// Fraction of the baseline's remaining error removed: `1 - (1 - a2) / (1 - a1)`.
pub fn error_rate_reduction(baseline_accuracy: f64, new_accuracy: f64) -> f64 {
    1.0 - (1.0 - new_accuracy) / (1.0 - baseline_accuracy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub variant: Variant,
    pub features: String,
    pub model: String,
    pub report: EvalReport,
}

pub const REPORT_HEADER: [&str; 7] = ["variant", "features", "model", "accuracy", "precision", "recall", "f1"];

pub fn write_report_rows<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(REPORT_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.variant.to_string(),
            r.features.clone(),
            r.model.clone(),
            format!("{:.6}", r.report.accuracy),
            format!("{:.6}", r.report.precision),
            format!("{:.6}", r.report.recall),
            format!("{:.6}", r.report.f1),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

/// Fixed-width table with percentages, one line per row.
pub fn format_table(rows: &[ReportRow]) -> String {
    let mut out = format!(
        "{:<8}{:<12}{:<16}{:>10}{:>10}{:>10}{:>10}\n",
        "variant", "features", "model", "accuracy", "precision", "recall", "f1"
    );
    for r in rows {
        out += &format!(
            "{:<8}{:<12}{:<16}{:>9.2}%{:>9.2}%{:>9.2}%{:>9.2}%\n",
            r.variant.to_string(),
            r.features,
            r.model,
            100.0 * r.report.accuracy,
            100.0 * r.report.precision,
            100.0 * r.report.recall,
            100.0 * r.report.f1
        );
    }
    out
}

/// Holdout split used by training and experiments for a given config.
pub fn split_spec(config: &RunConfig) -> SplitSpec {
    SplitSpec {
        test_fraction: config.test_fraction,
        seed: seed::derive(config.seed, "split"),
        stratified: true,
    }
}

pub fn model_label(config: &RunConfig) -> String {
    match config.method {
        Method::Lstm => format!("lstm_e{}_h{}", config.embed, config.hidden),
        m => m.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub row: ReportRow,
    pub fit: FitOutcome,
    pub train: Corpus,
    pub test: Corpus,
    pub test_predictions: Vec<f64>,
}

/// Split, fit on the train part and evaluate on the held-out part.
pub fn run_experiment(corpus: &Corpus, config: &RunConfig) -> Result<ExperimentOutcome> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus is empty"));
    }
    let (train, test) = split(corpus, &split_spec(config))?;
    let fit = fit_pipeline(&train, config, Some(&test))?;
    let test_predictions = fit.pipeline.predict_names(&test.names())?;
    let report = evaluate(&test_predictions, &test.labels(), DEFAULT_THRESHOLD)?;
    Ok(ExperimentOutcome {
        row: ReportRow {
            variant: config.variant,
            features: config.features.to_string(),
            model: model_label(config),
            report,
        },
        fit,
        train,
        test,
        test_predictions,
    })
}

/// Feature sets crossed with the classical methods in table order.
pub fn classical_grid() -> Vec<(FeatureSpec, Method)> {
    let features = [
        FeatureSpec::Basic,
        FeatureSpec::Ngram(2),
        FeatureSpec::Ngram(3),
        FeatureSpec::Ngram(4),
        FeatureSpec::Ngram(5),
    ];
    features
        .iter()
        .flat_map(|&f| [Method::Nb, Method::Logreg, Method::Gbt].map(|m| (f, m)))
        .collect()
}

/// One row per classical (features, method) pair for the configured variant.
pub fn run_classical_table(corpus: &Corpus, config: &RunConfig) -> Result<Vec<ReportRow>> {
    classical_grid()
        .into_iter()
        .map(|(features, method)| {
            let cfg = RunConfig {
                features,
                method,
                ..config.clone()
            };
            log::info!("experiment {} {features} {method}", cfg.variant);
            Ok(run_experiment(corpus, &cfg)?.row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub prefix: String,
    pub p_male: f64,
    pub p_female: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalTrace {
    pub name: String,
    pub model_id: String,
    pub rows: Vec<TraceRow>,
}

/// P(male) after each character: prefix `k` is padded to the indexer's
/// length and scored on its own.
pub fn incremental_trace(
    net: &LstmNetwork,
    indexer: &CharIndexer,
    name: &str,
    model_id: &str,
) -> Result<IncrementalTrace> {
    let chars: Vec<char> = name.chars().collect();
    if chars.is_empty() {
        return Err(Error::EmptyAfterNormalization { line: None });
    }
    let mut predictor = net.predictor();
    let mut rows = Vec::with_capacity(chars.len());
    for k in 1..=chars.len() {
        let prefix: String = chars[..k].iter().collect();
        let p_male = predictor.predict(&indexer.index_and_pad(&prefix)?)?;
        rows.push(TraceRow {
            prefix,
            p_male,
            p_female: 1.0 - p_male,
        });
    }
    Ok(IncrementalTrace {
        name: name.to_string(),
        model_id: model_id.to_string(),
        rows,
    })
}

impl IncrementalTrace {
    pub fn final_p_male(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.p_male)
    }

    /// `prefix,p_male,p_female`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["prefix", "p_male", "p_female"])?;
        for r in &self.rows {
            wtr.write_record([r.prefix.clone(), format!("{:.6}", r.p_male), format!("{:.6}", r.p_female)])?;
        }
        wtr.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    /// One bar per prefix: `M` cells for P(male), `F` cells for the rest.
    pub fn render_bars(&self, width: usize) -> String {
        let label_width = self.rows.iter().map(|r| r.prefix.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.rows {
            let m = ((r.p_male * width as f64).round() as usize).min(width);
            out += &format!(
                "{:<label_width$} |{}{}| m={:.3} f={:.3}\n",
                r.prefix,
                "M".repeat(m),
                "F".repeat(width - m),
                r.p_male,
                r.p_female
            );
        }
        out
    }
}
