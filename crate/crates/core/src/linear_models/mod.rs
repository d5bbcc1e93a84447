//! Naive Bayes, logistic regression and the cross-validated grid search harness.

mod grid;
mod logistic;
mod naive_bayes;

pub use grid::{
    accuracy, grid_search, stratified_folds, write_report, CandidateScore, GridSearchResult,
    Hyperparameters, DEFAULT_FOLDS,
};
pub use logistic::{logreg_fit, FitDiagnostics, LogisticModel, LogisticParams, Penalty};
pub use naive_bayes::{nb_fit, NaiveBayesModel, DEFAULT_ALPHA};

/// Penalty × C grid: 2 × 5 candidates.
pub fn logreg_grid() -> Vec<LogisticParams> {
    let mut grid = Vec::new();
    for penalty in [Penalty::L1, Penalty::L2] {
        for c in [0.01, 0.1, 1.0, 10.0, 100.0] {
            grid.push(LogisticParams::new(penalty, c));
        }
    }
    grid
}

impl Hyperparameters for LogisticParams {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![("penalty", self.penalty.to_string()), ("C", self.c.to_string())]
    }
}
