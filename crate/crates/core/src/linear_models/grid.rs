//! Exhaustive grid search scored by stratified k-fold cross-validation.

use std::io::Write;

use rand::seq::SliceRandom;

use crate::classifier::Classifier;
use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seed;

pub const DEFAULT_FOLDS: usize = 5;

/// Named hyperparameter values of one grid candidate, for reports.
pub trait Hyperparameters {
    fn fields(&self) -> Vec<(&'static str, String)>;
}

#[derive(Debug, Clone)]
pub struct CandidateScore<P> {
    pub params: P,
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct GridSearchResult<P, M> {
    pub candidates: Vec<CandidateScore<P>>,
    pub best_index: usize,
    pub best_model: M,
}

impl<P, M> GridSearchResult<P, M> {
    pub fn best(&self) -> &CandidateScore<P> {
        &self.candidates[self.best_index]
    }
}

/// Fold id per sample. Each class is shuffled separately and dealt round-robin.
pub fn stratified_folds(y: &[Gender], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = seed::rng(seed);
    let mut fold = vec![0; y.len()];
    for gender in [Gender::Male, Gender::Female] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == gender).collect();
        if idx.len() < k {
            return Err(Error::TooFewSamples(format!(
                "{k}-fold cross-validation needs at least {k} {gender} samples, found {}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold[i] = pos % k;
        }
    }
    Ok(fold)
}

pub fn accuracy(probs: &[f64], y: &[Gender]) -> f64 {
    let hits = probs
        .iter()
        .zip(y)
        .filter(|(p, g)| (**p >= 0.5) == g.is_male())
        .count();
    hits as f64 / y.len() as f64
}

/// Mean/population std of a score list.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Score every candidate on the same folds, pick the best mean accuracy
/// (first in grid order on ties) and refit it on all of `x`.
pub fn grid_search<P, M, F>(
    candidates: &[P],
    fit: F,
    x: &FeatureMatrix,
    y: &[Gender],
    folds: usize,
    seed: u64,
) -> Result<GridSearchResult<P, M>>
where
    P: Clone,
    M: Classifier,
    F: Fn(&P, &FeatureMatrix, &[Gender]) -> Result<M>,
{
    if candidates.is_empty() {
        return Err(Error::EmptyInput("grid has no candidates"));
    }
    if x.rows() != y.len() {
        return Err(Error::LabelMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    let assignment = stratified_folds(y, folds, seed)?;
    let splits: Vec<_> = (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..y.len()).filter(|&i| assignment[i] != f).collect();
            let test: Vec<usize> = (0..y.len()).filter(|&i| assignment[i] == f).collect();
            let pick = |idx: &[usize]| idx.iter().map(|&i| y[i]).collect::<Vec<_>>();
            (
                x.select_rows(&train),
                pick(&train),
                x.select_rows(&test),
                pick(&test),
            )
        })
        .collect();

    let mut scored = Vec::with_capacity(candidates.len());
    for params in candidates {
        let mut fold_scores = Vec::with_capacity(folds);
        for (xtr, ytr, xte, yte) in &splits {
            let model = fit(params, xtr, ytr)?;
            fold_scores.push(accuracy(&model.predict_proba_matrix(xte)?, yte));
        }
        let (mean, std) = mean_std(&fold_scores);
        scored.push(CandidateScore {
            params: params.clone(),
            fold_scores,
            mean,
            std,
        });
    }
    let mut best_index = 0;
    for (i, c) in scored.iter().enumerate() {
        if c.mean > scored[best_index].mean {
            best_index = i;
        }
    }
    let best_model = fit(&scored[best_index].params, x, y)?;
    Ok(GridSearchResult {
        candidates: scored,
        best_index,
        best_model,
    })
}

/// CSV report: `index,<hyperparameters...>,mean_accuracy,std_accuracy,best`.
pub fn write_report<P: Hyperparameters, W: Write>(
    candidates: &[CandidateScore<P>],
    best_index: usize,
    out: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    if let Some(first) = candidates.first() {
        let mut header = vec!["index".to_string()];
        header.extend(first.params.fields().iter().map(|(k, _)| k.to_string()));
        header.extend(["mean_accuracy", "std_accuracy", "best"].map(String::from));
        wtr.write_record(&header)?;
    }
    for (i, c) in candidates.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(c.params.fields().into_iter().map(|(_, v)| v));
        row.push(format!("{:.6}", c.mean));
        row.push(format!("{:.6}", c.std));
        row.push((i == best_index).to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified() {
        let mut y = vec![Gender::Male; 12];
        y.extend(vec![Gender::Female; 8]);
        let folds = stratified_folds(&y, 4, 3).unwrap();
        for f in 0..4 {
            let m = (0..20).filter(|&i| folds[i] == f && y[i].is_male()).count();
            let w = (0..20).filter(|&i| folds[i] == f && !y[i].is_male()).count();
            assert_eq!((m, w), (3, 2));
        }
        assert_eq!(folds, stratified_folds(&y, 4, 3).unwrap());
        assert!(matches!(
            stratified_folds(&y, 9, 0),
            Err(Error::TooFewSamples(_))
        ));
    }
}
