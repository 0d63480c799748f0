//! Small stateless layers: softmax classification head, cross-entropy,
//! inverted dropout.

use rand::Rng;

use super::linalg::{softmax, Mat};
use crate::corpus::Label;

/// Probability floor inside the loss so log never sees zero.
pub const XENT_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub weights: Mat, // n_classes x input_dim
    pub bias: Mat,    // 1 x n_classes
}

impl HeadParams {
    pub fn zeros(classes: usize, input_dim: usize) -> HeadParams {
        HeadParams {
            weights: Mat::zeros(classes, input_dim),
            bias: Mat::zeros(1, classes),
        }
    }

    pub fn uniform(classes: usize, input_dim: usize, scale: f64, rng: &mut impl Rng) -> HeadParams {
        HeadParams {
            weights: Mat::uniform(classes, input_dim, -scale, scale, rng),
            bias: Mat::zeros(1, classes),
        }
    }

    pub fn logits(&self, input: &[f64]) -> Vec<f64> {
        let mut z = self.bias.row(0).to_vec();
        self.weights.matvec_accum(input, &mut z);
        z
    }
}

/// Softmax head: probability distribution over the two classes.
pub fn classify_head(input: &[f64], p: &HeadParams) -> Vec<f64> {
    softmax(&p.logits(input))
}

/// Negative log-likelihood of the true label, clipped at [`XENT_CLIP`].
pub fn cross_entropy(probs: &[f64], label: Label) -> f64 {
    -probs[label.index()].max(XENT_CLIP).ln()
}

/// Gradient of cross_entropy(softmax(z), label) with respect to the logits.
pub(crate) fn xent_logit_grad(probs: &[f64], label: Label) -> Vec<f64> {
    let mut d = probs.to_vec();
    d[label.index()] -= 1.0;
    d
}

/// Inverted dropout: during training each component is zeroed with
/// probability `rate` and survivors are scaled by `1/(1-rate)`, so
/// inference is the identity.
pub fn dropout(x: &[f64], rate: f64, rng: &mut impl Rng, training: bool) -> Vec<f64> {
    if !training || rate == 0.0 {
        return x.to_vec();
    }
    let mask = dropout_mask(x.len(), rate, rng);
    x.iter().zip(&mask).map(|(v, m)| v * m).collect()
}

/// Multiplicative mask with entries 0 or 1/(1-rate). Exposed separately so
/// training code can reuse the mask in the backward pass.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut impl Rng) -> Vec<f64> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0,1)");
    let keep_scale = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| {
            if rng.gen::<f64>() < rate {
                0.0
            } else {
                keep_scale
            }
        })
        .collect()
}
