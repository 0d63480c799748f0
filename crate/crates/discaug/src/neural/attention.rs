//! Attention pooling over BiLSTM hidden outputs.
//!
//! Each position is scored against a trainable context vector:
//! `score_t = 1ᵀ tanh(Wh h_t + Wv v + b)`, the scores are softmax-normalized
//! over unmasked positions, and the sentence representation is the weighted
//! sum of hidden outputs. The all-ones reduction keeps the score scalar
//! while leaving every projection trainable.

use rand::Rng;

use super::linalg::{axpy, dot, Mat};
use super::lstm::live_prefix;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// Projects a hidden output (length 2H) into the score space.
    pub hidden_proj: Mat, // attn_dim x 2H
    /// Projects the context vector into the score space.
    pub context_proj: Mat, // attn_dim x attn_dim
    pub bias: Mat, // 1 x attn_dim
    /// Trainable context vector.
    pub context: Mat, // 1 x attn_dim
}

impl AttentionParams {
    pub fn zeros(attn_dim: usize, encoded_dim: usize) -> AttentionParams {
        AttentionParams {
            hidden_proj: Mat::zeros(attn_dim, encoded_dim),
            context_proj: Mat::zeros(attn_dim, attn_dim),
            bias: Mat::zeros(1, attn_dim),
            context: Mat::zeros(1, attn_dim),
        }
    }

    /// Projections uniform in [-scale, scale], bias zero, context vector
    /// uniform in [-0.1, 0.1] so it starts non-zero.
    pub fn uniform(
        attn_dim: usize,
        encoded_dim: usize,
        scale: f64,
        rng: &mut impl Rng,
    ) -> AttentionParams {
        AttentionParams {
            hidden_proj: Mat::uniform(attn_dim, encoded_dim, -scale, scale, rng),
            context_proj: Mat::uniform(attn_dim, attn_dim, -scale, scale, rng),
            bias: Mat::zeros(1, attn_dim),
            context: Mat::uniform(1, attn_dim, -0.1, 0.1, rng),
        }
    }

    pub fn attn_dim(&self) -> usize {
        self.bias.cols
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AttentionTrace {
    /// tanh activations per live position.
    pub activations: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub pooled: Vec<f64>,
    pub live: usize,
}

/// Weighted-sum pooling. Returns `(pooled, weights)`; masked positions get
/// weight exactly 0.
pub fn attention(hs: &[Vec<f64>], p: &AttentionParams, mask: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let trace = attention_forward(hs, p, mask);
    (trace.pooled, trace.weights)
}

pub(crate) fn attention_forward(
    hs: &[Vec<f64>],
    p: &AttentionParams,
    mask: &[bool],
) -> AttentionTrace {
    assert!(!hs.is_empty(), "attention: empty sequence");
    assert_eq!(hs.len(), mask.len());
    let live = live_prefix(mask);
    assert!(live >= 1, "attention: all positions masked");

    let attn_dim = p.attn_dim();
    // position-independent part: Wv v + b
    let mut base = vec![0.0; attn_dim];
    base.copy_from_slice(p.bias.row(0));
    p.context_proj.matvec_accum(p.context.row(0), &mut base);

    let mut activations = Vec::with_capacity(live);
    let mut scores = Vec::with_capacity(live);
    for h in &hs[..live] {
        let mut q = base.clone();
        p.hidden_proj.matvec_accum(h, &mut q);
        let u: Vec<f64> = q.iter().map(|v| v.tanh()).collect();
        scores.push(u.iter().sum::<f64>());
        activations.push(u);
    }

    // softmax over live scores, numerically shifted
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&e| (e - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    let mut weights = vec![0.0; hs.len()];
    for (t, e) in exps.iter().enumerate() {
        weights[t] = e / denom;
    }

    let width = hs[0].len();
    let mut pooled = vec![0.0; width];
    for t in 0..live {
        axpy(weights[t], &hs[t], &mut pooled);
    }

    AttentionTrace {
        activations,
        weights,
        pooled,
        live,
    }
}

/// Backprop through the pooling. `d_pooled` is the loss gradient at the
/// pooled vector; returns per-position gradients for the hidden outputs and
/// accumulates parameter gradients into `grads`.
pub(crate) fn attention_backward(
    hs: &[Vec<f64>],
    p: &AttentionParams,
    trace: &AttentionTrace,
    d_pooled: &[f64],
    grads: &mut AttentionParams,
) -> Vec<Vec<f64>> {
    let live = trace.live;
    let mut dh: Vec<Vec<f64>> = hs.iter().map(|h| vec![0.0; h.len()]).collect();

    // pooled = Σ w_t h_t
    let mut d_weights = vec![0.0; live];
    for t in 0..live {
        d_weights[t] = dot(d_pooled, &hs[t]);
        axpy(trace.weights[t], d_pooled, &mut dh[t]);
    }

    // softmax backward: d_score_t = w_t (d_w_t - Σ_j w_j d_w_j)
    let inner: f64 = (0..live).map(|j| trace.weights[j] * d_weights[j]).sum();
    let d_scores: Vec<f64> = (0..live)
        .map(|t| trace.weights[t] * (d_weights[t] - inner))
        .collect();

    // score = Σ_k tanh(q)_k, q = Wh h + Wv v + b
    let attn_dim = p.attn_dim();
    let mut d_base = vec![0.0; attn_dim]; // gradient of the shared Wv v + b term
    for t in 0..live {
        let u = &trace.activations[t];
        let dq: Vec<f64> = (0..attn_dim)
            .map(|k| d_scores[t] * (1.0 - u[k] * u[k]))
            .collect();
        grads.hidden_proj.add_outer(&dq, &hs[t]);
        p.hidden_proj.tr_matvec_accum(&dq, &mut dh[t]);
        for (b, d) in d_base.iter_mut().zip(&dq) {
            *b += d;
        }
    }
    for (b, d) in grads.bias.row_mut(0).iter_mut().zip(&d_base) {
        *b += d;
    }
    grads.context_proj.add_outer(&d_base, p.context.row(0));
    p.context_proj
        .tr_matvec_accum(&d_base, grads.context.row_mut(0));
    dh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_hs(rng: &mut impl Rng, t: usize, width: usize) -> Vec<Vec<f64>> {
        (0..t)
            .map(|_| (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn singleton_gets_weight_one() {
        let mut rng = rng_from_seed(1);
        let p = AttentionParams::uniform(3, 4, 0.5, &mut rng);
        let hs = random_hs(&mut rng, 1, 4);
        let (pooled, weights) = attention(&hs, &p, &[true]);
        assert_eq!(weights, vec![1.0]);
        assert_eq!(pooled, hs[0]);
    }

    #[test]
    fn identical_hidden_outputs_get_uniform_weights() {
        let mut rng = rng_from_seed(2);
        let p = AttentionParams::uniform(3, 4, 0.5, &mut rng);
        let h: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let hs = vec![h.clone(); 5];
        let (_, weights) = attention(&hs, &p, &[true; 5]);
        for w in &weights {
            assert!((w - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_normalize_and_masked_positions_are_exactly_zero() {
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            let t = rng.gen_range(1..7usize);
            let padded = t + rng.gen_range(0..3usize);
            let p = AttentionParams::uniform(2, 6, 0.7, &mut rng);
            let hs = random_hs(&mut rng, padded, 6);
            let mask: Vec<bool> = (0..padded).map(|i| i < t).collect();
            let (_, weights) = attention(&hs, &p, &mask);
            let sum: f64 = weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6);
            for w in &weights[t..] {
                assert_eq!(*w, 0.0);
            }
            assert!(weights[..t].iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    #[should_panic(expected = "all positions masked")]
    fn fully_masked_input_panics() {
        let p = AttentionParams::zeros(2, 4);
        let hs = vec![vec![0.0; 4]];
        attention(&hs, &p, &[false]);
    }
}
