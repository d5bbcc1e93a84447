//! Second-order gradient boosted trees for the logistic loss, grown with an
//! exact greedy split search.
//!
//! For each round, `g_i = p_i − y_i` and `h_i = p_i(1 − p_i)`. A split of a
//! node with sums `(G, H)` into `(G_L, H_L)` and `(G_R, H_R)` gains
//! `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ` and leaves carry `−G/(H+λ)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::{check_labels, check_width, logit, sigmoid, softplus, Classifier};
use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linear_models::Hyperparameters;

/// Relative margin below which two split gains count as tied.
const GAIN_TIE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseScore {
    /// Log-odds of the training male fraction.
    Prior,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub gamma: f64,
    pub eta: f64,
    pub lambda: f64,
    pub rounds: usize,
    pub base_score: BaseScore,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            min_child_weight: 1.0,
            gamma: 0.0,
            eta: 0.3,
            lambda: 1.0,
            rounds: 100,
            base_score: BaseScore::Prior,
        }
    }
}

impl Hyperparameters for GbtParams {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("max_depth", self.max_depth.to_string()),
            ("min_child_weight", self.min_child_weight.to_string()),
            ("gamma", self.gamma.to_string()),
        ]
    }
}

/// max_depth × min_child_weight × gamma: 8 × 5 × 5 candidates, other settings from `base`.
pub fn gbt_grid(base: &GbtParams) -> Vec<GbtParams> {
    let mut grid = Vec::new();
    for max_depth in 3..=10 {
        for min_child_weight in [0.0, 0.1, 1.0, 100.0, 1000.0] {
            for gamma in [0.0, 0.1, 1.0, 100.0, 1000.0] {
                grid.push(GbtParams {
                    max_depth,
                    min_child_weight,
                    gamma,
                    ..*base
                });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn split_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.split_count() + right.split_count(),
        }
    }

    fn dump_into(&self, out: &mut String, indent: usize, names: Option<&[String]>) {
        let pad = "  ".repeat(indent);
        match self {
            TreeNode::Leaf { weight } => {
                let _ = writeln!(out, "{pad}leaf weight={weight}");
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let name = names
                    .and_then(|n| n.get(*feature))
                    .map_or_else(|| format!("f{feature}"), |n| format!("f{feature}:{n}"));
                let _ = writeln!(out, "{pad}split {name} < {threshold}");
                left.dump_into(out, indent + 1, names);
                right.dump_into(out, indent + 1, names);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub params: GbtParams,
    pub base_score: f64,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
    /// Mean training log-loss before the first round and after each round.
    #[serde(skip)]
    pub train_loss: Vec<f64>,
}

impl BoostedModel {
    pub fn margin(&self, row: &[f64]) -> Result<f64> {
        check_width(self.n_features, row.len())?;
        let sum: f64 = self.trees.iter().map(|t| t.leaf_value(row)).sum();
        Ok(self.base_score + self.params.eta * sum)
    }

    pub fn split_count(&self) -> usize {
        self.trees.iter().map(TreeNode::split_count).sum()
    }

    /// One node per line, children indented under their parent.
    pub fn dump(&self, feature_names: Option<&[String]>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "base_score={} eta={}", self.base_score, self.params.eta);
        for (i, t) in self.trees.iter().enumerate() {
            let _ = writeln!(out, "tree {i}");
            t.dump_into(&mut out, 1, feature_names);
        }
        out
    }
}

impl Classifier for BoostedModel {
    fn width(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.margin(row)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let (g, h) = (gl + gr, hl + hr);
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma
}

pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn better(gain: f64, best: Option<&SplitChoice>) -> bool {
    match best {
        None => true,
        Some(b) => gain > b.gain + GAIN_TIE_EPS * b.gain.abs().max(1.0),
    }
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    sparse: Vec<Vec<(usize, f64)>>,
    grad: Vec<f64>,
    hess: Vec<f64>,
    params: &'a GbtParams,
    // per-feature scratch: (value, g, h) of nonzero entries in the current node
    buckets: Vec<Vec<(f64, f64, f64)>>,
}

impl Builder<'_> {
    fn best_split(&mut self, rows: &[usize], g_sum: f64, h_sum: f64) -> Option<SplitChoice> {
        let mut touched = Vec::new();
        for &r in rows {
            for &(f, v) in &self.sparse[r] {
                if self.buckets[f].is_empty() {
                    touched.push(f);
                }
                self.buckets[f].push((v, self.grad[r], self.hess[r]));
            }
        }
        touched.sort_unstable();
        let mut best: Option<SplitChoice> = None;
        let mut distinct: Vec<(f64, f64, f64)> = Vec::new();
        for f in touched {
            let mut entries = std::mem::take(&mut self.buckets[f]);
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            distinct.clear();
            for &(v, g, h) in &entries {
                match distinct.last_mut() {
                    Some(d) if d.0 == v => {
                        d.1 += g;
                        d.2 += h;
                    }
                    _ => distinct.push((v, g, h)),
                }
            }
            if rows.len() > entries.len() {
                // rows without an entry hold an implicit zero
                let gz = g_sum - entries.iter().map(|e| e.1).sum::<f64>();
                let hz = h_sum - entries.iter().map(|e| e.2).sum::<f64>();
                let at = distinct.partition_point(|d| d.0 < 0.0);
                distinct.insert(at, (0.0, gz, hz));
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            for j in 0..distinct.len().saturating_sub(1) {
                gl += distinct[j].1;
                hl += distinct[j].2;
                let (gr, hr) = (g_sum - gl, h_sum - hl);
                if hl < self.params.min_child_weight || hr < self.params.min_child_weight {
                    continue;
                }
                let gain = split_gain(gl, hl, gr, hr, self.params.lambda, self.params.gamma);
                if gain > 0.0 && better(gain, best.as_ref()) {
                    best = Some(SplitChoice {
                        feature: f,
                        threshold: 0.5 * (distinct[j].0 + distinct[j + 1].0),
                        gain,
                    });
                }
            }
            entries.clear();
            self.buckets[f] = entries;
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> TreeNode {
        let g_sum: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h_sum: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        let leaf = TreeNode::Leaf {
            weight: leaf_weight(g_sum, h_sum, self.params.lambda),
        };
        if depth >= self.params.max_depth {
            return leaf;
        }
        let Some(split) = self.best_split(&rows, g_sum, h_sum) else {
            return leaf;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x.get(r, split.feature) < split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }
}

fn mean_log_loss(margins: &[f64], y: &[f64]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(y)
        .map(|(m, t)| if *t > 0.5 { softplus(-m) } else { softplus(*m) })
        .sum();
    total / y.len() as f64
}

fn check_params(p: &GbtParams) -> Result<()> {
    let bad = |what: &str| Err(Error::InvalidHyperparameter(what.to_string()));
    if p.max_depth < 1 {
        return bad("max_depth must be at least 1");
    }
    for (name, v) in [
        ("min_child_weight", p.min_child_weight),
        ("gamma", p.gamma),
        ("lambda", p.lambda),
        ("eta", p.eta),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return bad(&format!("{name} must be finite and nonnegative, got {v}"));
        }
    }
    Ok(())
}

pub fn gbt_fit(x: &FeatureMatrix, y: &[Gender], params: &GbtParams) -> Result<BoostedModel> {
    check_params(params)?;
    x.check_finite()?;
    check_labels(x, y)?;
    let target: Vec<f64> = y.iter().map(|g| g.target()).collect();
    let base_score = match params.base_score {
        BaseScore::Prior => logit(target.iter().sum::<f64>() / target.len() as f64),
        BaseScore::Zero => 0.0,
    };
    let mut margins = vec![base_score; y.len()];
    let mut builder = Builder {
        x,
        sparse: x.sparse_rows(),
        grad: vec![0.0; y.len()],
        hess: vec![0.0; y.len()],
        params,
        buckets: vec![Vec::new(); x.cols()],
    };
    let mut trees = Vec::with_capacity(params.rounds);
    let mut train_loss = vec![mean_log_loss(&margins, &target)];
    for _ in 0..params.rounds {
        for i in 0..y.len() {
            let p = sigmoid(margins[i]);
            builder.grad[i] = p - target[i];
            builder.hess[i] = p * (1.0 - p);
        }
        let tree = builder.grow((0..y.len()).collect(), 0);
        for (i, m) in margins.iter_mut().enumerate() {
            *m += params.eta * tree.leaf_value(x.row(i));
        }
        train_loss.push(mean_log_loss(&margins, &target));
        trees.push(tree);
    }
    Ok(BoostedModel {
        params: *params,
        base_score,
        n_features: x.cols(),
        trees,
        train_loss,
    })
}
