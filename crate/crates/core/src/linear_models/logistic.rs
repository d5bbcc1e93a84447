//! L1/L2-penalized logistic regression fitted by accelerated proximal gradient
//! descent with backtracking and monotone restarts.
//!
//! Objective: `(1/C)·R(w) + Σ_i ln(1 + exp(−ỹ_i (w·x_i + b)))`, `ỹ ∈ {−1, +1}`,
//! with `R = ‖w‖₁` or `½‖w‖₂²`. The intercept is not penalized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::{check_labels, check_width, sigmoid, softplus, Classifier};
use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        })
    }
}

impl FromStr for Penalty {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            _ => Err(Error::InvalidArgument(format!("unknown penalty `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub penalty: Penalty,
    pub c: f64,
    /// Stop once the largest parameter change and the proximal gradient of
    /// the per-sample mean objective both fall below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            penalty: Penalty::L2,
            c: 1.0,
            tol: 1e-6,
            max_iter: 5000,
        }
    }
}

impl LogisticParams {
    pub fn new(penalty: Penalty, c: f64) -> Self {
        Self {
            penalty,
            c,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// Objective after every accepted step, starting from the initial point.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub penalty: Penalty,
    pub c: f64,
    pub diagnostics: FitDiagnostics,
}

struct Problem<'a> {
    rows: &'a [Vec<(usize, f64)>],
    signs: Vec<f64>,
    penalty: Penalty,
    inv_c: f64,
}

impl Problem<'_> {
    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| b + r.iter().map(|&(j, v)| w[j] * v).sum::<f64>())
            .collect()
    }

    fn data_loss(&self, w: &[f64], b: f64) -> f64 {
        self.margins(w, b)
            .iter()
            .zip(&self.signs)
            .map(|(z, s)| softplus(-s * z))
            .sum()
    }

    fn regularizer(&self, w: &[f64]) -> f64 {
        match self.penalty {
            Penalty::L1 => w.iter().map(|v| v.abs()).sum(),
            Penalty::L2 => 0.5 * w.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    fn objective(&self, w: &[f64], b: f64) -> f64 {
        self.data_loss(w, b) + self.inv_c * self.regularizer(w)
    }

    /// Data loss and its gradient with respect to (w, b).
    fn loss_and_grad(&self, w: &[f64], b: f64) -> (f64, Vec<f64>, f64) {
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        let mut loss = 0.0;
        for (r, (z, s)) in self
            .rows
            .iter()
            .zip(self.margins(w, b).iter().zip(&self.signs))
        {
            loss += softplus(-s * z);
            // d/dz ln(1+exp(-s z)) = -s σ(-s z)
            let d = -s * sigmoid(-s * z);
            gb += d;
            for &(j, v) in r {
                gw[j] += d * v;
            }
        }
        (loss, gw, gb)
    }

    fn prox(&self, v: f64, step: f64) -> f64 {
        let t = step * self.inv_c;
        match self.penalty {
            Penalty::L1 => v.signum() * (v.abs() - t).max(0.0),
            Penalty::L2 => v / (1.0 + t),
        }
    }
}

pub fn logreg_fit(x: &FeatureMatrix, y: &[Gender], params: &LogisticParams) -> Result<LogisticModel> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidHyperparameter(format!(
            "C must be positive, got {}",
            params.c
        )));
    }
    x.check_finite()?;
    check_labels(x, y)?;
    let rows = x.sparse_rows();
    let problem = Problem {
        rows: &rows,
        signs: y.iter().map(|g| if g.is_male() { 1.0 } else { -1.0 }).collect(),
        penalty: params.penalty,
        inv_c: 1.0 / params.c,
    };

    let mut w = vec![0.0; x.cols()];
    let mut b = 0.0;
    let mut obj = problem.objective(&w, b);
    // extrapolation point and momentum
    let (mut yw, mut yb, mut t) = (w.clone(), b, 1.0_f64);
    let mut step: f64 = 1.0;
    let n = rows.len() as f64;
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let (loss, gw, gb) = problem.loss_and_grad(&yw, yb);
        step = (step * 2.0).min(1e6);
        let (zw, zb, zloss) = loop {
            let zw: Vec<f64> = yw
                .iter()
                .zip(&gw)
                .map(|(wj, gj)| problem.prox(wj - step * gj, step))
                .collect();
            let zb = yb - step * gb;
            let zloss = problem.data_loss(&zw, zb);
            // sufficient decrease of the quadratic upper model
            let mut lin = (zb - yb) * gb;
            let mut sq = (zb - yb) * (zb - yb);
            for j in 0..w.len() {
                let d = zw[j] - yw[j];
                lin += d * gw[j];
                sq += d * d;
            }
            // rounding allowance; monotonicity is enforced by the F(z) check below
            let slack = 1e-12 * loss.abs().max(1.0);
            if zloss <= loss + lin + sq / (2.0 * step) + slack || step < 1e-20 {
                break (zw, zb, zloss);
            }
            step *= 0.5;
        };
        // gradient mapping of the per-sample mean objective
        let mapping = zw
            .iter()
            .zip(&yw)
            .map(|(a, c)| (a - c).abs())
            .fold((zb - yb).abs(), f64::max)
            / (step * n);
        let zobj = zloss + problem.inv_c * problem.regularizer(&zw);
        if zobj > obj {
            // a plain step from x that cannot decrease F would repeat forever
            if t == 1.0 {
                converged = mapping < params.tol;
                break;
            }
            // momentum overshot: keep x, restart from a plain proximal step
            yw.clone_from(&w);
            yb = b;
            t = 1.0;
            trace.push(obj);
            continue;
        }
        let change = zw
            .iter()
            .zip(&w)
            .map(|(a, c)| (a - c).abs())
            .fold((zb - b).abs(), f64::max);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for j in 0..w.len() {
            yw[j] = zw[j] + beta * (zw[j] - w[j]);
        }
        yb = zb + beta * (zb - b);
        t = t_next;
        w = zw;
        b = zb;
        obj = zobj;
        trace.push(obj);
        if change < params.tol && mapping < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "logistic regression ({} C={}) stopped after {iterations} iterations without converging",
            params.penalty,
            params.c
        );
    }

    Ok(LogisticModel {
        weights: w,
        intercept: b,
        penalty: params.penalty,
        c: params.c,
        diagnostics: FitDiagnostics {
            iterations,
            converged,
            objective: *trace.last().unwrap(),
            objective_trace: trace,
        },
    })
}

impl LogisticModel {
    pub fn decision_function(&self, row: &[f64]) -> Result<f64> {
        check_width(self.weights.len(), row.len())?;
        Ok(self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
    }

    /// Unpenalized data loss on a labeled set.
    pub fn data_loss(&self, x: &FeatureMatrix, y: &[Gender]) -> Result<f64> {
        let mut total = 0.0;
        for (row, g) in x.iter_rows().zip(y) {
            let s = if g.is_male() { 1.0 } else { -1.0 };
            total += softplus(-s * self.decision_function(row)?);
        }
        Ok(total)
    }
}

impl Classifier for LogisticModel {
    fn width(&self) -> usize {
        self.weights.len()
    }

    fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.decision_function(row)?))
    }
}
