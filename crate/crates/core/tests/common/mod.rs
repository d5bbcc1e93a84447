//! Independent reference implementations shared by the integration and
//! acceptance tests. Each works from the defining formula, never from the
//! library's own helpers.

#![allow(dead_code)]

use namegender::char_lstm::{LstmNetwork, LstmParams};
use namegender::corpus::Gender;
use namegender::features::FeatureMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Gender> {
    // both classes present
    let mut y: Vec<Gender> = (0..n)
        .map(|_| if rng.random_bool(0.5) { Gender::Male } else { Gender::Female })
        .collect();
    y[0] = Gender::Male;
    y[n - 1] = Gender::Female;
    y
}

pub fn random_counts(rng: &mut ChaCha8Rng, rows: usize, cols: usize, max: u32) -> FeatureMatrix {
    let data = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0..=max) as f64).collect())
        .collect();
    FeatureMatrix::from_unnamed_rows(data).unwrap()
}

/// χ² of each column from an explicit 2 × F table of summed feature values
/// against class-frequency expectations.
pub fn chi2_oracle(x: &FeatureMatrix, y: &[Gender]) -> Vec<f64> {
    let n = y.len() as f64;
    let n_male = y.iter().filter(|g| g.is_male()).count() as f64;
    let class_freq = [(n - n_male) / n, n_male / n];
    (0..x.cols())
        .map(|f| {
            let mut observed = [0.0, 0.0];
            for (i, g) in y.iter().enumerate() {
                observed[usize::from(g.is_male())] += x.get(i, f);
            }
            let total = observed[0] + observed[1];
            if total == 0.0 {
                return 0.0;
            }
            (0..2)
                .map(|c| {
                    let expected = class_freq[c] * total;
                    (observed[c] - expected).powi(2) / expected
                })
                .sum()
        })
        .collect()
}

/// Multinomial NB posterior P(male | row) by multiplying raw smoothed
/// probabilities; only usable on small counts.
pub fn nb_oracle(x: &FeatureMatrix, y: &[Gender], alpha: f64, row: &[f64]) -> f64 {
    let f = x.cols();
    let mut joint = [0.0; 2];
    for (c, gender) in [Gender::Female, Gender::Male].into_iter().enumerate() {
        let members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == gender).collect();
        let prior = members.len() as f64 / y.len() as f64;
        let per_feature: Vec<f64> = (0..f).map(|j| members.iter().map(|&i| x.get(i, j)).sum()).collect();
        let total: f64 = per_feature.iter().sum();
        let mut likelihood = 1.0;
        for j in 0..f {
            let theta = (per_feature[j] + alpha) / (total + alpha * f as f64);
            likelihood *= theta.powf(row[j]);
        }
        joint[c] = prior * likelihood;
    }
    joint[1] / (joint[0] + joint[1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best first-round depth-1 split by trying every midpoint of every feature
/// and summing gradients directly. Later candidates must beat the incumbent
/// by the library's relative tie margin.
pub fn stump_oracle(x: &FeatureMatrix, y: &[Gender], lambda: f64, gamma: f64, min_child_weight: f64) -> Option<Stump> {
    let n = y.len() as f64;
    let prior = y.iter().filter(|g| g.is_male()).count() as f64 / n;
    let (g, h): (Vec<f64>, Vec<f64>) = y
        .iter()
        .map(|t| {
            let target = if t.is_male() { 1.0 } else { 0.0 };
            (prior - target, prior * (1.0 - prior))
        })
        .unzip();
    let score = |gs: f64, hs: f64| gs * gs / (hs + lambda);
    let (g_all, h_all): (f64, f64) = (g.iter().sum(), h.iter().sum());
    let mut best: Option<Stump> = None;
    for f in 0..x.cols() {
        let mut values: Vec<f64> = (0..y.len()).map(|i| x.get(i, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let threshold = 0.5 * (w[0] + w[1]);
            let (mut gl, mut hl) = (0.0, 0.0);
            for i in 0..y.len() {
                if x.get(i, f) < threshold {
                    gl += g[i];
                    hl += h[i];
                }
            }
            let (gr, hr) = (g_all - gl, h_all - hl);
            if hl < min_child_weight || hr < min_child_weight {
                continue;
            }
            let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(g_all, h_all)) - gamma;
            let wins = match best {
                None => gain > 0.0,
                Some(b) => gain > 0.0 && gain > b.gain + 1e-10 * b.gain.abs().max(1.0),
            };
            if wins {
                best = Some(Stump {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn sig(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// P(male) for one index sequence: embedding lookup and the i, f, c, o gate
/// recurrence from the zero state over every position, pads included.
pub fn lstm_oracle(p: &LstmParams, hidden: usize, seq: &[usize]) -> f64 {
    let e = p.embedding.shape[1];
    let emb = |tok: usize, a: usize| p.embedding.values[tok * e + a];
    let w = |a: usize, j: usize| p.kernel.values[a * 4 * hidden + j];
    let u = |k: usize, j: usize| p.recurrent_kernel.values[k * 4 * hidden + j];
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    for &tok in seq {
        let mut z = vec![0.0; 4 * hidden];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut acc = p.bias.values[j];
            for a in 0..e {
                acc += emb(tok, a) * w(a, j);
            }
            for (k, hk) in h.iter().enumerate() {
                acc += hk * u(k, j);
            }
            *zj = acc;
        }
        for j in 0..hidden {
            let i_gate = sig(z[j]);
            let f_gate = sig(z[hidden + j]);
            let cand = z[2 * hidden + j].tanh();
            let o_gate = sig(z[3 * hidden + j]);
            c[j] = f_gate * c[j] + i_gate * cand;
            h[j] = o_gate * c[j].tanh();
        }
    }
    let logit: f64 = p.output_bias.values[0] + h.iter().zip(&p.output_weight.values).map(|(a, b)| a * b).sum::<f64>();
    sig(logit)
}

/// Mean binary cross-entropy of the oracle forward pass (no clamping; the
/// fixtures keep probabilities away from 0 and 1).
pub fn lstm_oracle_loss(p: &LstmParams, hidden: usize, seqs: &[Vec<usize>], targets: &[f64]) -> f64 {
    seqs.iter()
        .zip(targets)
        .map(|(s, &y)| {
            let prob = lstm_oracle(p, hidden, s);
            -(y * prob.ln() + (1.0 - y) * (1.0 - prob).ln())
        })
        .sum::<f64>()
        / seqs.len() as f64
}

/// Central finite differences of the oracle loss for every parameter.
pub fn finite_difference_grads(net: &LstmNetwork, seqs: &[Vec<usize>], targets: &[f64], delta: f64) -> LstmParams {
    let mut grads = net.params.clone();
    let mut probe = net.params.clone();
    for (ti, grad_tensor) in grads.tensors_mut().into_iter().enumerate() {
        for k in 0..grad_tensor.values.len() {
            let orig = probe.tensors()[ti].values[k];
            probe.tensors_mut()[ti].values[k] = orig + delta;
            let up = lstm_oracle_loss(&probe, net.hidden, seqs, targets);
            probe.tensors_mut()[ti].values[k] = orig - delta;
            let down = lstm_oracle_loss(&probe, net.hidden, seqs, targets);
            probe.tensors_mut()[ti].values[k] = orig;
            grad_tensor.values[k] = (up - down) / (2.0 * delta);
        }
    }
    grads
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Gradient-check fixture: vocabulary of 6 rows, embed 3, hidden 4, four
/// length-6 sequences with 0 to 4 leading pads.
pub fn gradient_fixture() -> (LstmNetwork, Vec<Vec<usize>>, Vec<f64>) {
    let mut r = rng(2024);
    let mut net = LstmNetwork::zeros(6, 3, 4);
    for t in net.params.tensors_mut() {
        for v in &mut t.values {
            *v = r.random_range(-0.5..0.5);
        }
    }
    let seqs = vec![
        vec![0, 0, 1, 2, 3, 4],
        vec![0, 1, 5, 2, 2, 3],
        vec![3, 4, 1, 2, 5, 1],
        vec![0, 0, 0, 0, 2, 1],
    ];
    (net, seqs, vec![1.0, 0.0, 1.0, 0.0])
}

/// Three Adam steps on one scalar written out with literal constants
/// (β₁ = 0.9, β₂ = 0.999, lr = 0.001, ε = 1e-8).
pub fn adam_hand_trajectory(x0: f64, g: [f64; 3]) -> [f64; 3] {
    let lr = 0.001;
    let eps = 1e-8;
    let m1 = 0.1 * g[0];
    let v1 = 0.001 * g[0] * g[0];
    let x1 = x0 - lr * (m1 / 0.1) / ((v1 / 0.001).sqrt() + eps);
    let m2 = 0.09 * g[0] + 0.1 * g[1];
    let v2 = 0.000999 * g[0] * g[0] + 0.001 * g[1] * g[1];
    let x2 = x1 - lr * (m2 / 0.19) / ((v2 / 0.001999).sqrt() + eps);
    let m3 = 0.081 * g[0] + 0.09 * g[1] + 0.1 * g[2];
    let v3 = 0.000998001 * g[0] * g[0] + 0.000999 * g[1] * g[1] + 0.001 * g[2] * g[2];
    let x3 = x2 - lr * (m3 / 0.271) / ((v3 / 0.002997001).sqrt() + eps);
    [x1, x2, x3]
}
