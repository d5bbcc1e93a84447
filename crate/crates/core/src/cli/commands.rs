use std::fs;
use std::path::{Path, PathBuf};

use super::{ModelArtifact, RunConfig, TrainingMetadata};
use crate::boosted_trees::{gbt_fit, gbt_grid};
use crate::char_lstm::{dim_sweep, TrainReport, FIRST_NAME_DIMS, FULL_NAME_DIMS};
use crate::corpus::synthetic::generate_synthetic;
use crate::corpus::{load_corpus, normalize_name, split, Corpus, Gender};
use crate::error::{Error, Result};
use crate::eval_explain::{
    evaluate, incremental_trace, model_label, run_classical_table, run_experiment, split_spec, write_report_rows,
    IncrementalTrace, ReportRow, DEFAULT_THRESHOLD,
};
use crate::linear_models::{
    accuracy, grid_search, logreg_fit, logreg_grid, write_report, CandidateScore, Hyperparameters, LogisticParams,
};
use crate::pipeline::{fit_pipeline, Featurizer, Method, Model, Variant};
use crate::seed;

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn report_bytes(rows: &[ReportRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_report_rows(rows, &mut buf)?;
    Ok(buf)
}

pub fn cmd_gen(n: usize, male_fraction: f64, seed: u64, out: &Path) -> Result<Corpus> {
    let corpus = generate_synthetic(n, male_fraction, seed)?;
    corpus.save(out)?;
    Ok(corpus)
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub artifact: ModelArtifact,
    pub row: ReportRow,
    pub lstm_report: Option<TrainReport>,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

/// Fits on the train split, evaluates on the held-out split and writes
/// `model.json`, `report.csv` and, when produced, `epochs.csv` and `grid.csv`
/// into `out_dir`.
pub fn cmd_train(data: &Path, config: &RunConfig, out_dir: &Path) -> Result<TrainOutput> {
    let corpus = load_corpus(data)?;
    let outcome = run_experiment(&corpus, config)?;
    let artifact = ModelArtifact::new(
        outcome.fit.pipeline,
        TrainingMetadata {
            seed: config.seed,
            config: config.clone(),
            corpus_fingerprint: corpus.fingerprint(),
            train_size: outcome.train.len(),
            test_size: outcome.test.len(),
        },
    );
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    let mut emit = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = out_dir.join(name);
        write_file(&path, bytes)?;
        files.push(path);
        Ok(())
    };
    emit("model.json", artifact.to_json()?.as_bytes())?;
    emit("report.csv", &report_bytes(std::slice::from_ref(&outcome.row))?)?;
    if let Some(r) = &outcome.fit.lstm_report {
        emit("epochs.csv", r.to_csv().as_bytes())?;
    }
    if let Some(g) = &outcome.fit.grid_report {
        emit("grid.csv", g.as_bytes())?;
    }
    Ok(TrainOutput {
        artifact,
        row: outcome.row,
        lstm_report: outcome.fit.lstm_report,
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmDims {
    pub embed: usize,
    pub hidden: usize,
}

impl Hyperparameters for LstmDims {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![("embed", self.embed.to_string()), ("hidden", self.hidden.to_string())]
    }
}

/// Embedding × hidden sweep for a variant.
pub fn lstm_grid(variant: Variant) -> Vec<LstmDims> {
    let dims = match variant {
        Variant::Full => &FULL_NAME_DIMS,
        Variant::First => &FIRST_NAME_DIMS,
    };
    dim_sweep(dims)
        .into_iter()
        .map(|(embed, hidden)| LstmDims { embed, hidden })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSummary {
    pub candidates: usize,
    pub best_index: usize,
    pub best: Vec<(&'static str, String)>,
    pub best_score: f64,
}

fn finish_grid<P: Hyperparameters>(candidates: &[CandidateScore<P>], best_index: usize, out: &Path) -> Result<GridSummary> {
    let mut buf = Vec::new();
    write_report(candidates, best_index, &mut buf)?;
    write_file(out, &buf)?;
    Ok(GridSummary {
        candidates: candidates.len(),
        best_index,
        best: candidates[best_index].params.fields(),
        best_score: candidates[best_index].mean,
    })
}

/// Scores every grid candidate and writes the per-candidate CSV. Logreg and
/// gbt use k-fold CV on the train split; the char-LSTM sweep is scored on
/// the held-out split.
pub fn cmd_gridsearch(data: &Path, config: &RunConfig, out: &Path) -> Result<GridSummary> {
    let corpus = load_corpus(data)?;
    let (train, test) = split(&corpus, &split_spec(config))?;
    let cv_seed = seed::derive(config.seed, "cv");
    match config.method {
        Method::Nb => Err(Error::InvalidArgument("naive bayes has no hyperparameter grid".into())),
        Method::Logreg | Method::Gbt => {
            let names: Vec<&str> = train.names().into_iter().map(|n| config.variant.view(n)).collect();
            let labels = train.labels();
            let (_, x) = Featurizer::fit_tabular(config.features, &names, &labels, config.top_k)?;
            if config.method == Method::Logreg {
                let grid: Vec<LogisticParams> = logreg_grid()
                    .into_iter()
                    .map(|p| LogisticParams {
                        tol: config.tol,
                        max_iter: config.max_iter,
                        ..p
                    })
                    .collect();
                let r = grid_search(&grid, |p, x, y| logreg_fit(x, y, p), &x, &labels, config.folds, cv_seed)?;
                finish_grid(&r.candidates, r.best_index, out)
            } else {
                let r = grid_search(
                    &gbt_grid(&config.gbt),
                    |p, x, y| gbt_fit(x, y, p),
                    &x,
                    &labels,
                    config.folds,
                    cv_seed,
                )?;
                finish_grid(&r.candidates, r.best_index, out)
            }
        }
        Method::Lstm => {
            let labels = test.labels();
            let mut scored: Vec<CandidateScore<LstmDims>> = Vec::new();
            for dims in lstm_grid(config.variant) {
                let cfg = RunConfig {
                    embed: dims.embed,
                    hidden: dims.hidden,
                    ..config.clone()
                };
                log::info!("lstm sweep: embed={} hidden={}", dims.embed, dims.hidden);
                let fit = fit_pipeline(&train, &cfg, None)?;
                let acc = accuracy(&fit.pipeline.predict_names(&test.names())?, &labels);
                scored.push(CandidateScore {
                    params: dims,
                    fold_scores: vec![acc],
                    mean: acc,
                    std: 0.0,
                });
            }
            let mut best = 0;
            for (i, c) in scored.iter().enumerate() {
                if c.mean > scored[best].mean {
                    best = i;
                }
            }
            finish_grid(&scored, best, out)
        }
    }
}

/// Scores a saved model on every row of a labeled file.
pub fn cmd_eval(model: &Path, data: &Path, out: Option<&Path>) -> Result<ReportRow> {
    let artifact = ModelArtifact::load(model)?;
    let corpus = load_corpus(data)?;
    let probs = artifact.pipeline().predict_names(&corpus.names())?;
    let row = ReportRow {
        variant: artifact.variant,
        features: artifact.featurizer.spec().to_string(),
        model: model_label(&artifact.metadata.config),
        report: evaluate(&probs, &corpus.labels(), DEFAULT_THRESHOLD)?,
    };
    if let Some(path) = out {
        write_file(path, &report_bytes(std::slice::from_ref(&row))?)?;
    }
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub p_male: f64,
    pub p_female: f64,
    pub label: Gender,
}

pub fn cmd_predict(model: &Path, name: &str) -> Result<Prediction> {
    let artifact = ModelArtifact::load(model)?;
    let p_male = artifact.pipeline().predict_raw(name)?;
    Ok(Prediction {
        p_male,
        p_female: 1.0 - p_male,
        label: if p_male >= DEFAULT_THRESHOLD {
            Gender::Male
        } else {
            Gender::Female
        },
    })
}

/// Per-prefix trace of a char-LSTM artifact; the CSV goes to `out` if given.
pub fn cmd_explain(model: &Path, name: &str, out: Option<&Path>) -> Result<IncrementalTrace> {
    let artifact = ModelArtifact::load(model)?;
    let pipeline = artifact.pipeline();
    let (net, indexer) = pipeline.char_lstm()?;
    let normalized = normalize_name(name)?;
    let id = artifact.model_fingerprint()?;
    let trace = incremental_trace(net, indexer, artifact.variant.view(&normalized), &id[..12])?;
    if let Some(path) = out {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(trace)
}

/// Text dump of every tree, with feature names.
pub fn cmd_dump_trees(model: &Path, out: Option<&Path>) -> Result<String> {
    let artifact = ModelArtifact::load(model)?;
    let Model::Boosted(boosted) = &artifact.model else {
        return Err(Error::WrongModelKind {
            expected: "gbt",
            found: artifact.model.method().to_string(),
        });
    };
    let text = boosted.dump(Some(&artifact.featurizer.column_names()));
    if let Some(path) = out {
        write_file(path, text.as_bytes())?;
    }
    Ok(text)
}

/// The classical table (basic and 2..5-gram × nb/logreg/gbt) followed by the
/// configured char-LSTM, written as one report CSV.
pub fn cmd_experiment(data: &Path, config: &RunConfig, with_lstm: bool, out: &Path) -> Result<Vec<ReportRow>> {
    let corpus = load_corpus(data)?;
    let mut rows = run_classical_table(&corpus, config)?;
    if with_lstm {
        let cfg = RunConfig {
            method: Method::Lstm,
            features: crate::pipeline::FeatureSpec::Chars,
            ..config.clone()
        };
        rows.push(run_experiment(&corpus, &cfg)?.row);
    }
    write_file(out, &report_bytes(&rows)?)?;
    Ok(rows)
}
