//! Embedding → single LSTM layer → sigmoid output, with full
//! backpropagation through time.
//!
//! Gate pre-activations are laid out as four blocks of `hidden` columns in
//! the order input, forget, cell candidate, output. Leading pad positions are
//! run through the recurrence like any other index; because every sequence
//! starts from the zero state, the state after `k` pads is shared by the
//! whole batch and computed once.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::classifier::sigmoid;
use crate::error::{Error, Result};
use crate::features::PaddedSequence;
use crate::seed::Rng;

pub const PROB_CLAMP: f64 = 1e-7;

/// Dense row-major tensor with an explicit shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            values: vec![0.0; shape.iter().product()],
        }
    }

    fn uniform(shape: &[usize], limit: f64, rng: &mut Rng) -> Self {
        let mut t = Self::zeros(shape);
        for v in &mut t.values {
            *v = rng.random_range(-limit..limit);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.shape[1];
        &self.values[i * w..(i + 1) * w]
    }
}

pub const TENSOR_NAMES: [&str; 6] = [
    "embedding",
    "kernel",
    "recurrent_kernel",
    "bias",
    "output_weight",
    "output_bias",
];

/// All trainable tensors. Also used to hold gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    /// (vocab rows) × embed_dim; row 0 is the pad index.
    pub embedding: Tensor,
    /// embed_dim × 4·hidden
    pub kernel: Tensor,
    /// hidden × 4·hidden
    pub recurrent_kernel: Tensor,
    /// 4·hidden
    pub bias: Tensor,
    /// hidden
    pub output_weight: Tensor,
    /// 1
    pub output_bias: Tensor,
}

impl LstmParams {
    pub fn zeros(vocab_rows: usize, embed_dim: usize, hidden: usize) -> Self {
        Self {
            embedding: Tensor::zeros(&[vocab_rows, embed_dim]),
            kernel: Tensor::zeros(&[embed_dim, 4 * hidden]),
            recurrent_kernel: Tensor::zeros(&[hidden, 4 * hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
            output_weight: Tensor::zeros(&[hidden]),
            output_bias: Tensor::zeros(&[1]),
        }
    }

    pub fn tensors(&self) -> [&Tensor; 6] {
        [
            &self.embedding,
            &self.kernel,
            &self.recurrent_kernel,
            &self.bias,
            &self.output_weight,
            &self.output_bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 6] {
        [
            &mut self.embedding,
            &mut self.kernel,
            &mut self.recurrent_kernel,
            &mut self.bias,
            &mut self.output_weight,
            &mut self.output_bias,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.values.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmNetwork {
    pub vocab_rows: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub params: LstmParams,
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Activations of one unrolled run. Row `t` of `h`/`c` is the state before
/// step `t`; row 0 is the initial state.
#[derive(Debug, Clone)]
struct Trace {
    tokens: Vec<usize>,
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Debug, Clone)]
struct SampleTrace {
    pads: usize,
    trace: Trace,
}

/// Cached forward activations for a batch.
#[derive(Debug, Clone)]
pub struct BatchForward {
    pad_chain: Trace,
    samples: Vec<SampleTrace>,
    pub probs: Vec<f64>,
}

impl BatchForward {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Hidden states `h_1..h_T` of sample `i` over its real (non-pad) steps.
    pub fn hidden_states(&self, i: usize, hidden: usize) -> Vec<&[f64]> {
        let t = &self.samples[i].trace;
        (1..=t.tokens.len())
            .map(|k| &t.h[k * hidden..(k + 1) * hidden])
            .collect()
    }
}

pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

impl LstmNetwork {
    pub fn zeros(vocab_rows: usize, embed_dim: usize, hidden: usize) -> Self {
        Self {
            vocab_rows,
            embed_dim,
            hidden,
            params: LstmParams::zeros(vocab_rows, embed_dim, hidden),
        }
    }

    /// Embedding uniform in ±0.05, Glorot-uniform kernels, zero biases with
    /// forget-gate bias 1.
    pub fn init(vocab_rows: usize, embed_dim: usize, hidden: usize, rng: &mut Rng) -> Self {
        let glorot = |fan_in: usize, fan_out: usize| (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut bias = Tensor::zeros(&[4 * hidden]);
        bias.values[hidden..2 * hidden].fill(1.0);
        let params = LstmParams {
            embedding: Tensor::uniform(&[vocab_rows, embed_dim], 0.05, rng),
            kernel: Tensor::uniform(
                &[embed_dim, 4 * hidden],
                glorot(embed_dim, 4 * hidden),
                rng,
            ),
            recurrent_kernel: Tensor::uniform(&[hidden, 4 * hidden], glorot(hidden, 4 * hidden), rng),
            bias,
            output_weight: Tensor::uniform(&[hidden], glorot(hidden, 1), rng),
            output_bias: Tensor::zeros(&[1]),
        };
        Self {
            vocab_rows,
            embed_dim,
            hidden,
            params,
        }
    }

    pub fn check_shapes(&self) -> Result<()> {
        let want = LstmParams::zeros(self.vocab_rows, self.embed_dim, self.hidden);
        for ((have, want), name) in self.params.tensors().iter().zip(want.tensors()).zip(TENSOR_NAMES) {
            if have.shape != want.shape || have.values.len() != want.values.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{name}: expected {:?}, found {:?} with {} values",
                    want.shape,
                    have.shape,
                    have.values.len()
                )));
            }
        }
        Ok(())
    }

    /// `E · W`: the input contribution to the gate pre-activations for every vocabulary row.
    fn projection_table(&self) -> Vec<f64> {
        let g = 4 * self.hidden;
        let mut proj = vec![0.0; self.vocab_rows * g];
        for tok in 0..self.vocab_rows {
            let out = &mut proj[tok * g..(tok + 1) * g];
            for (a, &e) in self.params.embedding.row(tok).iter().enumerate() {
                axpy(e, self.params.kernel.row(a), out);
            }
        }
        proj
    }

    fn new_trace(&self, tokens: Vec<usize>, h0: &[f64], c0: &[f64]) -> Trace {
        let (h, steps) = (self.hidden, tokens.len());
        let mut trace = Trace {
            tokens,
            gates: vec![0.0; steps * 4 * h],
            tanh_c: vec![0.0; steps * h],
            h: vec![0.0; (steps + 1) * h],
            c: vec![0.0; (steps + 1) * h],
        };
        trace.h[..h].copy_from_slice(h0);
        trace.c[..h].copy_from_slice(c0);
        trace
    }

    /// Runs every step of `trace.tokens`, filling the activations.
    fn run(&self, proj: &[f64], trace: &mut Trace) {
        let h = self.hidden;
        let g4 = 4 * h;
        let u = &self.params.recurrent_kernel;
        let bias = &self.params.bias.values;
        for t in 0..trace.tokens.len() {
            let tok = trace.tokens[t];
            let (h_done, h_next) = trace.h.split_at_mut((t + 1) * h);
            let h_prev = &h_done[t * h..];
            let z = &mut trace.gates[t * g4..(t + 1) * g4];
            z.copy_from_slice(&proj[tok * g4..(tok + 1) * g4]);
            for (zj, bj) in z.iter_mut().zip(bias) {
                *zj += bj;
            }
            for (k, &hk) in h_prev.iter().enumerate() {
                axpy(hk, u.row(k), z);
            }
            let (zi, rest) = z.split_at_mut(h);
            let (zf, rest) = rest.split_at_mut(h);
            let (zg, zo) = rest.split_at_mut(h);
            zi.iter_mut().for_each(|v| *v = sigmoid(*v));
            zf.iter_mut().for_each(|v| *v = sigmoid(*v));
            zg.iter_mut().for_each(|v| *v = v.tanh());
            zo.iter_mut().for_each(|v| *v = sigmoid(*v));
            let (c_done, c_next) = trace.c.split_at_mut((t + 1) * h);
            let c_prev = &c_done[t * h..];
            let c_new = &mut c_next[..h];
            let tanh_c = &mut trace.tanh_c[t * h..(t + 1) * h];
            let h_new = &mut h_next[..h];
            for j in 0..h {
                c_new[j] = zf[j] * c_prev[j] + zi[j] * zg[j];
                tanh_c[j] = c_new[j].tanh();
                h_new[j] = zo[j] * tanh_c[j];
            }
        }
    }

    fn output(&self, h_last: &[f64]) -> f64 {
        sigmoid(dot(&self.params.output_weight.values, h_last) + self.params.output_bias.values[0])
    }

    fn validate(&self, seq: &PaddedSequence) -> Result<usize> {
        if let Some(&bad) = seq.indices.iter().find(|&&i| i >= self.vocab_rows) {
            return Err(Error::IndexOutOfVocabulary {
                index: bad,
                rows: self.vocab_rows,
            });
        }
        Ok(seq.indices.iter().take_while(|&&i| i == 0).count())
    }

    fn pad_chain(&self, proj: &[f64], pads: usize) -> Trace {
        let zero = vec![0.0; self.hidden];
        let mut chain = self.new_trace(vec![0; pads], &zero, &zero);
        self.run(proj, &mut chain);
        chain
    }

    pub fn forward_batch(&self, seqs: &[&PaddedSequence]) -> Result<BatchForward> {
        let pads: Vec<usize> = seqs.iter().map(|s| self.validate(s)).collect::<Result<_>>()?;
        let proj = self.projection_table();
        let h = self.hidden;
        let pad_chain = self.pad_chain(&proj, pads.iter().copied().max().unwrap_or(0));
        let mut samples = Vec::with_capacity(seqs.len());
        let mut probs = Vec::with_capacity(seqs.len());
        for (seq, &p) in seqs.iter().zip(&pads) {
            let mut trace = self.new_trace(
                seq.indices[p..].to_vec(),
                &pad_chain.h[p * h..(p + 1) * h],
                &pad_chain.c[p * h..(p + 1) * h],
            );
            self.run(&proj, &mut trace);
            let steps = trace.tokens.len();
            probs.push(self.output(&trace.h[steps * h..]));
            samples.push(SampleTrace { pads: p, trace });
        }
        Ok(BatchForward {
            pad_chain,
            samples,
            probs,
        })
    }

    /// Single-sequence forward pass returning P(male) and the cached activations.
    pub fn forward(&self, seq: &PaddedSequence) -> Result<(f64, BatchForward)> {
        let fwd = self.forward_batch(&[seq])?;
        Ok((fwd.probs[0], fwd))
    }

    /// Backpropagate one unrolled trace from the adjoint `(dh, dc)` of its
    /// final state; returns the adjoint of its initial state.
    fn backprop_trace(
        &self,
        trace: &Trace,
        mut dh: Vec<f64>,
        mut dc: Vec<f64>,
        grads: &mut LstmParams,
        dproj: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let h = self.hidden;
        let g4 = 4 * h;
        let u = &self.params.recurrent_kernel;
        let mut dz = vec![0.0; g4];
        for t in (0..trace.tokens.len()).rev() {
            let gates = &trace.gates[t * g4..(t + 1) * g4];
            let (gi, gf, gg, go) = (&gates[..h], &gates[h..2 * h], &gates[2 * h..3 * h], &gates[3 * h..]);
            let tanh_c = &trace.tanh_c[t * h..(t + 1) * h];
            let c_prev = &trace.c[t * h..(t + 1) * h];
            let h_prev = &trace.h[t * h..(t + 1) * h];
            for j in 0..h {
                let d_o = dh[j] * tanh_c[j];
                let dct = dc[j] + dh[j] * go[j] * (1.0 - tanh_c[j] * tanh_c[j]);
                let d_i = dct * gg[j];
                let d_g = dct * gi[j];
                let d_f = dct * c_prev[j];
                dc[j] = dct * gf[j];
                dz[j] = d_i * gi[j] * (1.0 - gi[j]);
                dz[h + j] = d_f * gf[j] * (1.0 - gf[j]);
                dz[2 * h + j] = d_g * (1.0 - gg[j] * gg[j]);
                dz[3 * h + j] = d_o * go[j] * (1.0 - go[j]);
            }
            let tok = trace.tokens[t];
            axpy(1.0, &dz, &mut dproj[tok * g4..(tok + 1) * g4]);
            axpy(1.0, &dz, &mut grads.bias.values);
            let du = &mut grads.recurrent_kernel.values;
            for (k, &hk) in h_prev.iter().enumerate() {
                axpy(hk, &dz, &mut du[k * g4..(k + 1) * g4]);
                dh[k] = dot(u.row(k), &dz);
            }
        }
        (dh, dc)
    }

    /// Gradients of the mean binary cross-entropy of the batch.
    pub fn backward(&self, fwd: &BatchForward, targets: &[f64]) -> Result<LstmParams> {
        if targets.len() != fwd.len() {
            return Err(Error::LengthMismatch {
                left: fwd.len(),
                right: targets.len(),
            });
        }
        let h = self.hidden;
        let g4 = 4 * h;
        let scale = 1.0 / fwd.len() as f64;
        let mut grads = LstmParams::zeros(self.vocab_rows, self.embed_dim, h);
        let mut dproj = vec![0.0; self.vocab_rows * g4];
        let max_pads = fwd.pad_chain.tokens.len();
        let mut junction_h = vec![vec![0.0; h]; max_pads + 1];
        let mut junction_c = vec![vec![0.0; h]; max_pads + 1];

        for ((sample, &p), &y) in fwd.samples.iter().zip(&fwd.probs).zip(targets) {
            let steps = sample.trace.tokens.len();
            let h_last = &sample.trace.h[steps * h..];
            let dlogit = (p - y) * scale;
            axpy(dlogit, h_last, &mut grads.output_weight.values);
            grads.output_bias.values[0] += dlogit;
            let dh: Vec<f64> = self.params.output_weight.values.iter().map(|w| dlogit * w).collect();
            let (dh0, dc0) = self.backprop_trace(&sample.trace, dh, vec![0.0; h], &mut grads, &mut dproj);
            axpy(1.0, &dh0, &mut junction_h[sample.pads]);
            axpy(1.0, &dc0, &mut junction_c[sample.pads]);
        }

        // Walk the shared pad prefix back from its end, picking up the
        // adjoints of the samples that branch off at each length.
        let mut carry_h = vec![0.0; h];
        let mut carry_c = vec![0.0; h];
        for k in (1..=max_pads).rev() {
            axpy(1.0, &junction_h[k], &mut carry_h);
            axpy(1.0, &junction_c[k], &mut carry_c);
            let step = Trace {
                tokens: vec![0],
                gates: fwd.pad_chain.gates[(k - 1) * g4..k * g4].to_vec(),
                tanh_c: fwd.pad_chain.tanh_c[(k - 1) * h..k * h].to_vec(),
                h: fwd.pad_chain.h[(k - 1) * h..(k + 1) * h].to_vec(),
                c: fwd.pad_chain.c[(k - 1) * h..(k + 1) * h].to_vec(),
            };
            let (nh, nc) = self.backprop_trace(&step, carry_h, carry_c, &mut grads, &mut dproj);
            carry_h = nh;
            carry_c = nc;
        }

        // proj = E · W
        for tok in 0..self.vocab_rows {
            let dp = &dproj[tok * g4..(tok + 1) * g4];
            if dp.iter().all(|&v| v == 0.0) {
                continue;
            }
            let e = self.params.embedding.row(tok);
            for (a, &ea) in e.iter().enumerate() {
                axpy(ea, dp, &mut grads.kernel.values[a * g4..(a + 1) * g4]);
                grads.embedding.values[tok * self.embed_dim + a] = dot(self.params.kernel.row(a), dp);
            }
        }
        Ok(grads)
    }

    /// Mean clamped binary cross-entropy of the batch.
    pub fn batch_loss(fwd: &BatchForward, targets: &[f64]) -> f64 {
        fwd.probs
            .iter()
            .zip(targets)
            .map(|(&p, &y)| bce_loss(p, y))
            .sum::<f64>()
            / targets.len() as f64
    }

    pub fn predictor(&self) -> Predictor<'_> {
        let proj = self.projection_table();
        Predictor {
            net: self,
            proj,
            pad_chain: None,
        }
    }

    /// P(male) for one sequence.
    pub fn predict_proba(&self, seq: &PaddedSequence) -> Result<f64> {
        self.predictor().predict(seq)
    }
}

/// Inference helper that reuses the input projection and the pad-prefix
/// states across calls.
pub struct Predictor<'a> {
    net: &'a LstmNetwork,
    proj: Vec<f64>,
    pad_chain: Option<Trace>,
}

impl Predictor<'_> {
    pub fn predict(&mut self, seq: &PaddedSequence) -> Result<f64> {
        let net = self.net;
        let pads = net.validate(seq)?;
        let h = net.hidden;
        if self.pad_chain.as_ref().is_none_or(|c| c.tokens.len() < pads) {
            self.pad_chain = Some(net.pad_chain(&self.proj, pads.max(seq.indices.len())));
        }
        let chain = self.pad_chain.as_ref().unwrap();
        let mut trace = net.new_trace(
            seq.indices[pads..].to_vec(),
            &chain.h[pads * h..(pads + 1) * h],
            &chain.c[pads * h..(pads + 1) * h],
        );
        net.run(&self.proj, &mut trace);
        let steps = trace.tokens.len();
        Ok(net.output(&trace.h[steps * h..]))
    }

    pub fn predict_many(&mut self, seqs: &[PaddedSequence]) -> Result<Vec<f64>> {
        seqs.iter().map(|s| self.predict(s)).collect()
    }
}
