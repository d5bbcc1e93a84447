use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::network::{bce_loss, LstmNetwork};
use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::features::PaddedSequence;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            embed_dim: 64,
            hidden: 64,
            batch_size: 32,
            epochs: 20,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

/// Embedding/hidden sizes swept for full names.
pub const FULL_NAME_DIMS: [usize; 3] = [64, 128, 256];
/// Embedding/hidden sizes swept for first names.
pub const FIRST_NAME_DIMS: [usize; 3] = [32, 64, 128];

/// All (embed_dim, hidden) pairs from a dimension list.
pub fn dim_sweep(dims: &[usize]) -> Vec<(usize, usize)> {
    dims.iter()
        .flat_map(|&d| dims.iter().map(move |&h| (d, h)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
    pub train_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss before the first update.
    pub initial_loss: f64,
    pub epochs: Vec<EpochMetrics>,
}

impl TrainReport {
    /// `epoch,train_acc,test_acc,train_loss`; missing test accuracy is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_acc,test_acc,train_loss\n");
        for e in &self.epochs {
            let test = e.test_acc.map(|a| format!("{a:.6}")).unwrap_or_default();
            out += &format!("{},{:.6},{},{:.6}\n", e.epoch, e.train_acc, test, e.train_loss);
        }
        out
    }

    /// Epoch with the highest held-out accuracy (earliest on ties).
    pub fn best_test_epoch(&self) -> Option<&EpochMetrics> {
        self.epochs
            .iter()
            .filter(|e| e.test_acc.is_some())
            .fold(None, |best: Option<&EpochMetrics>, e| match best {
                Some(b) if b.test_acc >= e.test_acc => Some(b),
                _ => Some(e),
            })
    }
}

/// Accuracy and mean loss of the network on a labeled set.
pub fn evaluate_sequences(net: &LstmNetwork, seqs: &[PaddedSequence], labels: &[Gender]) -> Result<(f64, f64)> {
    let probs = net.predictor().predict_many(seqs)?;
    let mut hits = 0;
    let mut loss = 0.0;
    for (p, g) in probs.iter().zip(labels) {
        hits += usize::from((*p >= 0.5) == g.is_male());
        loss += bce_loss(*p, g.target());
    }
    let n = labels.len() as f64;
    Ok((hits as f64 / n, loss / n))
}

/// Mini-batch Adam on binary cross-entropy. Samples are reshuffled each
/// epoch; the final short batch is kept.
pub fn train(
    net: &mut LstmNetwork,
    seqs: &[PaddedSequence],
    labels: &[Gender],
    config: &TrainConfig,
    held_out: Option<(&[PaddedSequence], &[Gender])>,
) -> Result<TrainReport> {
    if seqs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: seqs.len(),
            right: labels.len(),
        });
    }
    if seqs.is_empty() {
        return Err(Error::EmptyInput("no training sequences"));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidHyperparameter("batch size must be positive".into()));
    }
    let width = seqs[0].indices.len();
    if seqs.iter().any(|s| s.indices.len() != width) {
        return Err(Error::ShapeMismatch("training sequences differ in length".into()));
    }
    net.check_shapes()?;

    let targets: Vec<f64> = labels.iter().map(|g| g.target()).collect();
    let lengths: Vec<usize> = net.params.tensors().iter().map(|t| t.len()).collect();
    let mut adam = AdamState::new(&lengths).with_lr(config.learning_rate);
    let mut rng = seed::component_rng(config.seed, "lstm-shuffle");
    let mut order: Vec<usize> = (0..seqs.len()).collect();

    let (_, initial_loss) = evaluate_sequences(net, seqs, labels)?;
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let batch_seqs: Vec<&PaddedSequence> = batch.iter().map(|&i| &seqs[i]).collect();
            let batch_targets: Vec<f64> = batch.iter().map(|&i| targets[i]).collect();
            let fwd = net.forward_batch(&batch_seqs)?;
            let grads = net.backward(&fwd, &batch_targets)?;
            let grad_slices: Vec<&[f64]> = grads.tensors().iter().map(|t| &t.values[..]).collect();
            let mut param_slices: Vec<&mut [f64]> = net
                .params
                .tensors_mut()
                .into_iter()
                .map(|t| &mut t.values[..])
                .collect();
            adam_step(&mut param_slices, &grad_slices, &mut adam)?;
        }
        if !net.params.is_finite() {
            return Err(Error::TrainingDiverged(format!(
                "parameters became non-finite in epoch {epoch}"
            )));
        }
        let (train_acc, train_loss) = evaluate_sequences(net, seqs, labels)?;
        let test_acc = match held_out {
            Some((s, l)) => Some(evaluate_sequences(net, s, l)?.0),
            None => None,
        };
        log::info!(
            "epoch {epoch}: train_acc={train_acc:.4} train_loss={train_loss:.4} test_acc={test_acc:?}"
        );
        epochs.push(EpochMetrics {
            epoch,
            train_acc,
            test_acc,
            train_loss,
        });
    }
    Ok(TrainReport {
        initial_loss,
        epochs,
    })
}
