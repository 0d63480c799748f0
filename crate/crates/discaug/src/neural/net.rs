//! End-to-end differentiable networks: the attention-BiLSTM classifier
//! (also used as the augmentation validator) and the CNN classifier.
//!
//! Both own a trainable embedding table and expose their parameters as a
//! fixed-order list of named matrices. That one representation drives the
//! flat views used by Adam, the finite-difference gradient checker, and the
//! text checkpoint format.

use crate::corpus::Label;
use crate::neural::attention::{
    attention_backward, attention_forward, AttentionParams, AttentionTrace,
};
use crate::neural::conv::{conv_backward, conv_forward, ConvParams, ConvTrace};
use crate::neural::linalg::Mat;
use crate::neural::lstm::{lstm_backward, lstm_forward, LstmParams, StepTrace};
use crate::neural::ops::{xent_logit_grad, HeadParams, XENT_CLIP};
use crate::rng::{derive_seed, rng_from_seed};
use crate::text::EmbeddingTable;

/// Weight matrices start uniform in [-0.08, 0.08].
pub const WEIGHT_INIT_SCALE: f64 = 0.08;

/// Named parameter matrices in a fixed traversal order.
pub trait ParamMats {
    fn mats(&self) -> Vec<(String, &Mat)>;
    fn mats_mut(&mut self) -> Vec<(String, &mut Mat)>;

    fn flat_len(&self) -> usize {
        self.mats().iter().map(|(_, m)| m.as_slice().len()).sum()
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.flat_len());
        for (_, m) in self.mats() {
            flat.extend_from_slice(m.as_slice());
        }
        flat
    }

    fn set_from_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for (_, m) in self.mats_mut() {
            let len = m.as_slice().len();
            m.as_mut_slice()
                .copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        assert_eq!(offset, flat.len(), "flat parameter length mismatch");
    }

    /// (name, offset, len) per matrix, in flat order.
    fn flat_layout(&self) -> Vec<(String, usize, usize)> {
        let mut layout = Vec::new();
        let mut offset = 0;
        for (name, m) in self.mats() {
            let len = m.as_slice().len();
            layout.push((name, offset, len));
            offset += len;
        }
        layout
    }

    fn add_assign(&mut self, other: &Self) {
        for ((_, a), (_, b)) in self.mats_mut().into_iter().zip(other.mats()) {
            a.add_assign(b);
        }
    }

    fn scale(&mut self, s: f64) {
        for (_, m) in self.mats_mut() {
            m.scale(s);
        }
    }

    fn l2_norm(&self) -> f64 {
        self.mats()
            .iter()
            .flat_map(|(_, m)| m.as_slice())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    fn is_finite(&self) -> bool {
        self.mats().iter().all(|(_, m)| m.is_finite())
    }
}

fn lstm_mats<'a>(prefix: &str, p: &'a LstmParams, out: &mut Vec<(String, &'a Mat)>) {
    for (gate_name, gate) in p.gates() {
        out.push((format!("{prefix}.{gate_name}.w"), &gate.w));
        out.push((format!("{prefix}.{gate_name}.u"), &gate.u));
        out.push((format!("{prefix}.{gate_name}.b"), &gate.b));
    }
}

fn lstm_mats_mut<'a>(prefix: &str, p: &'a mut LstmParams, out: &mut Vec<(String, &'a mut Mat)>) {
    for (gate_name, gate) in p.gates_mut() {
        out.push((format!("{prefix}.{gate_name}.w"), &mut gate.w));
        out.push((format!("{prefix}.{gate_name}.u"), &mut gate.u));
        out.push((format!("{prefix}.{gate_name}.b"), &mut gate.b));
    }
}

/// Embedding lookup, BiLSTM encoder, attention pooling, softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct AttnBiLstmNet {
    pub embedding: Mat, // V x d
    pub fwd: LstmParams,
    pub bwd: LstmParams,
    pub attn: AttentionParams,
    pub head: HeadParams,
}

impl AttnBiLstmNet {
    /// Fresh network around an embedding table. Non-embedding weights are
    /// drawn from a sub-seed so embedding initialization stays independent.
    pub fn new(
        embedding: &EmbeddingTable,
        hidden: usize,
        attn_dim: usize,
        seed: u64,
    ) -> AttnBiLstmNet {
        let dim = embedding.dim;
        let vocab = embedding.vocab_size();
        let mut rng = rng_from_seed(derive_seed(seed, &["net"]));
        AttnBiLstmNet {
            embedding: Mat::from_vec(vocab, dim, embedding.as_flat().to_vec()),
            fwd: LstmParams::uniform(hidden, dim, WEIGHT_INIT_SCALE, &mut rng),
            bwd: LstmParams::uniform(hidden, dim, WEIGHT_INIT_SCALE, &mut rng),
            attn: AttentionParams::uniform(attn_dim, 2 * hidden, WEIGHT_INIT_SCALE, &mut rng),
            head: HeadParams::uniform(2, 2 * hidden, WEIGHT_INIT_SCALE, &mut rng),
        }
    }

    /// All-zero network of the given dimensions.
    pub fn zeros(vocab: usize, dim: usize, hidden: usize, attn_dim: usize) -> AttnBiLstmNet {
        AttnBiLstmNet {
            embedding: Mat::zeros(vocab, dim),
            fwd: LstmParams::zeros(hidden, dim),
            bwd: LstmParams::zeros(hidden, dim),
            attn: AttentionParams::zeros(attn_dim, 2 * hidden),
            head: HeadParams::zeros(2, 2 * hidden),
        }
    }

    pub fn zeros_like(&self) -> AttnBiLstmNet {
        let (dim, hidden, attn_dim, vocab) = self.dims();
        AttnBiLstmNet::zeros(vocab, dim, hidden, attn_dim)
    }

    /// (embedding dim, hidden, attention dim, vocab size)
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.embedding.cols,
            self.fwd.hidden,
            self.attn.attn_dim(),
            self.embedding.rows,
        )
    }

    fn embed(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        ids.iter()
            .map(|&i| self.embedding.row(i).to_vec())
            .collect()
    }

    fn forward_trace(&self, ids: &[usize]) -> BiLstmTrace {
        assert!(!ids.is_empty(), "forward on empty token sequence");
        let xs = self.embed(ids);
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let fwd_steps = lstm_forward(&refs, &self.fwd);
        let reversed: Vec<&[f64]> = refs.iter().rev().cloned().collect();
        let bwd_steps = lstm_forward(&reversed, &self.bwd);

        let hidden = self.fwd.hidden;
        let live = ids.len();
        let hs: Vec<Vec<f64>> = (0..live)
            .map(|t| {
                let mut h = Vec::with_capacity(2 * hidden);
                h.extend_from_slice(&fwd_steps[t].h);
                h.extend_from_slice(&bwd_steps[live - 1 - t].h);
                h
            })
            .collect();

        let mask = vec![true; live];
        let attn = attention_forward(&hs, &self.attn, &mask);
        let probs = crate::neural::ops::classify_head(&attn.pooled, &self.head);
        BiLstmTrace {
            xs,
            fwd_steps,
            bwd_steps,
            hs,
            attn,
            probs,
        }
    }

    /// Class probabilities for one encoded sequence.
    pub fn predict_probs(&self, ids: &[usize]) -> Vec<f64> {
        self.forward_trace(ids).probs
    }

    /// Attention weights alongside the prediction, for inspection.
    pub fn predict_with_attention(&self, ids: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let trace = self.forward_trace(ids);
        (trace.probs, trace.attn.weights)
    }

    /// Cross-entropy loss of one labeled sequence.
    pub fn loss(&self, ids: &[usize], label: Label) -> f64 {
        -self.forward_trace(ids).probs[label.index()]
            .max(XENT_CLIP)
            .ln()
    }

    /// Loss and full parameter gradients for one labeled sequence.
    pub fn backward(&self, ids: &[usize], label: Label) -> (f64, AttnBiLstmNet) {
        let trace = self.forward_trace(ids);
        let loss = -trace.probs[label.index()].max(XENT_CLIP).ln();
        let mut grads = self.zeros_like();
        let live = ids.len();
        let hidden = self.fwd.hidden;

        // head
        let d_logits = xent_logit_grad(&trace.probs, label);
        grads.head.weights.add_outer(&d_logits, &trace.attn.pooled);
        for (b, d) in grads.head.bias.row_mut(0).iter_mut().zip(&d_logits) {
            *b += d;
        }
        let mut d_pooled = vec![0.0; 2 * hidden];
        self.head.weights.tr_matvec_accum(&d_logits, &mut d_pooled);

        // attention
        let dh = attention_backward(
            &trace.hs,
            &self.attn,
            &trace.attn,
            &d_pooled,
            &mut grads.attn,
        );

        // split the concatenated gradients back into the two directions
        let dh_fwd: Vec<Vec<f64>> = dh.iter().map(|d| d[..hidden].to_vec()).collect();
        let dh_bwd_rev: Vec<Vec<f64>> = (0..live)
            .map(|j| dh[live - 1 - j][hidden..].to_vec())
            .collect();

        let refs: Vec<&[f64]> = trace.xs.iter().map(|v| v.as_slice()).collect();
        let dx_fwd = lstm_backward(&refs, &self.fwd, &trace.fwd_steps, &dh_fwd, &mut grads.fwd);
        let reversed: Vec<&[f64]> = refs.iter().rev().cloned().collect();
        let dx_rev = lstm_backward(
            &reversed,
            &self.bwd,
            &trace.bwd_steps,
            &dh_bwd_rev,
            &mut grads.bwd,
        );

        // embedding rows collect gradients from both directions
        for t in 0..live {
            let row = grads.embedding.row_mut(ids[t]);
            for (r, v) in row.iter_mut().zip(&dx_fwd[t]) {
                *r += v;
            }
            for (r, v) in row.iter_mut().zip(&dx_rev[live - 1 - t]) {
                *r += v;
            }
        }
        (loss, grads)
    }
}

struct BiLstmTrace {
    xs: Vec<Vec<f64>>,
    fwd_steps: Vec<StepTrace>,
    bwd_steps: Vec<StepTrace>,
    hs: Vec<Vec<f64>>,
    attn: AttentionTrace,
    probs: Vec<f64>,
}

impl ParamMats for AttnBiLstmNet {
    fn mats(&self) -> Vec<(String, &Mat)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        lstm_mats("fwd", &self.fwd, &mut out);
        lstm_mats("bwd", &self.bwd, &mut out);
        out.push(("attn.hidden_proj".into(), &self.attn.hidden_proj));
        out.push(("attn.context_proj".into(), &self.attn.context_proj));
        out.push(("attn.bias".into(), &self.attn.bias));
        out.push(("attn.context".into(), &self.attn.context));
        out.push(("head.weights".into(), &self.head.weights));
        out.push(("head.bias".into(), &self.head.bias));
        out
    }

    fn mats_mut(&mut self) -> Vec<(String, &mut Mat)> {
        let mut out: Vec<(String, &mut Mat)> = vec![("embedding".to_string(), &mut self.embedding)];
        lstm_mats_mut("fwd", &mut self.fwd, &mut out);
        lstm_mats_mut("bwd", &mut self.bwd, &mut out);
        out.push(("attn.hidden_proj".into(), &mut self.attn.hidden_proj));
        out.push(("attn.context_proj".into(), &mut self.attn.context_proj));
        out.push(("attn.bias".into(), &mut self.attn.bias));
        out.push(("attn.context".into(), &mut self.attn.context));
        out.push(("head.weights".into(), &mut self.head.weights));
        out.push(("head.bias".into(), &mut self.head.bias));
        out
    }
}

/// Embedding lookup, multi-width convolution with max pooling, dropout,
/// softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnNet {
    pub embedding: Mat,
    pub conv: ConvParams,
    pub head: HeadParams,
}

impl CnnNet {
    pub fn new(
        embedding: &EmbeddingTable,
        widths: &[usize],
        n_filters: usize,
        seed: u64,
    ) -> CnnNet {
        let dim = embedding.dim;
        let vocab = embedding.vocab_size();
        let mut rng = rng_from_seed(derive_seed(seed, &["net"]));
        let conv = ConvParams::uniform(widths, n_filters, dim, WEIGHT_INIT_SCALE, &mut rng);
        let feature_len = conv.feature_len();
        CnnNet {
            embedding: Mat::from_vec(vocab, dim, embedding.as_flat().to_vec()),
            conv,
            head: HeadParams::uniform(2, feature_len, WEIGHT_INIT_SCALE, &mut rng),
        }
    }

    /// All-zero network of the given dimensions.
    pub fn zeros(vocab: usize, dim: usize, widths: &[usize], n_filters: usize) -> CnnNet {
        let conv = ConvParams::zeros(widths, n_filters, dim);
        let feature_len = conv.feature_len();
        CnnNet {
            embedding: Mat::zeros(vocab, dim),
            conv,
            head: HeadParams::zeros(2, feature_len),
        }
    }

    pub fn zeros_like(&self) -> CnnNet {
        let widths: Vec<usize> = self.conv.banks.iter().map(|b| b.width).collect();
        let n_filters = self.conv.banks.first().map(|b| b.weights.rows).unwrap_or(0);
        CnnNet::zeros(self.embedding.rows, self.embedding.cols, &widths, n_filters)
    }

    fn embed(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        ids.iter()
            .map(|&i| self.embedding.row(i).to_vec())
            .collect()
    }

    fn forward_trace(&self, ids: &[usize], dropout_mask: Option<&[f64]>) -> CnnTrace {
        assert!(!ids.is_empty(), "forward on empty token sequence");
        let xs = self.embed(ids);
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let mask = vec![true; ids.len()];
        let conv = conv_forward(&refs, &self.conv, &mask);
        let features = match dropout_mask {
            Some(m) => conv.features.iter().zip(m).map(|(f, s)| f * s).collect(),
            None => conv.features.clone(),
        };
        let probs = crate::neural::ops::classify_head(&features, &self.head);
        CnnTrace {
            xs,
            conv,
            features,
            probs,
        }
    }

    pub fn predict_probs(&self, ids: &[usize]) -> Vec<f64> {
        self.forward_trace(ids, None).probs
    }

    pub fn loss(&self, ids: &[usize], label: Label) -> f64 {
        -self.forward_trace(ids, None).probs[label.index()]
            .max(XENT_CLIP)
            .ln()
    }

    /// Loss and gradients; `dropout_mask` (from [`super::ops::dropout_mask`])
    /// is applied to the pooled features when given.
    pub fn backward(
        &self,
        ids: &[usize],
        label: Label,
        dropout_mask: Option<&[f64]>,
    ) -> (f64, CnnNet) {
        let trace = self.forward_trace(ids, dropout_mask);
        let loss = -trace.probs[label.index()].max(XENT_CLIP).ln();
        let mut grads = self.zeros_like();

        let d_logits = xent_logit_grad(&trace.probs, label);
        grads.head.weights.add_outer(&d_logits, &trace.features);
        for (b, d) in grads.head.bias.row_mut(0).iter_mut().zip(&d_logits) {
            *b += d;
        }
        let mut d_features = vec![0.0; trace.features.len()];
        self.head
            .weights
            .tr_matvec_accum(&d_logits, &mut d_features);
        if let Some(m) = dropout_mask {
            for (d, s) in d_features.iter_mut().zip(m) {
                *d *= s;
            }
        }

        let refs: Vec<&[f64]> = trace.xs.iter().map(|v| v.as_slice()).collect();
        let dx = conv_backward(&refs, &self.conv, &trace.conv, &d_features, &mut grads.conv);
        for (t, d) in dx.iter().enumerate() {
            let row = grads.embedding.row_mut(ids[t]);
            for (r, v) in row.iter_mut().zip(d) {
                *r += v;
            }
        }
        (loss, grads)
    }
}

struct CnnTrace {
    xs: Vec<Vec<f64>>,
    conv: ConvTrace,
    features: Vec<f64>,
    probs: Vec<f64>,
}

impl ParamMats for CnnNet {
    fn mats(&self) -> Vec<(String, &Mat)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        for bank in &self.conv.banks {
            out.push((format!("conv{}.weights", bank.width), &bank.weights));
            out.push((format!("conv{}.bias", bank.width), &bank.bias));
        }
        out.push(("head.weights".into(), &self.head.weights));
        out.push(("head.bias".into(), &self.head.bias));
        out
    }

    fn mats_mut(&mut self) -> Vec<(String, &mut Mat)> {
        let mut out: Vec<(String, &mut Mat)> = vec![("embedding".to_string(), &mut self.embedding)];
        for bank in &mut self.conv.banks {
            out.push((format!("conv{}.weights", bank.width), &mut bank.weights));
            out.push((format!("conv{}.bias", bank.width), &mut bank.bias));
        }
        out.push(("head.weights".into(), &mut self.head.weights));
        out.push(("head.bias".into(), &mut self.head.bias));
        out
    }
}
