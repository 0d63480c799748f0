//! L2-regularized logistic regression on bag-of-words counts, trained by
//! full-batch gradient descent.
//!
//! The objective is mean log loss plus `l2_penalty/2 * ||w||^2` (bias
//! unregularized). Using the mean makes the minimizer invariant under
//! duplicating the training set. The step size is set from a Lipschitz
//! bound on the gradient, so descent never needs a line search.

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neural::linalg::{sigmoid, Mat};
use crate::text::Vocabulary;

pub const GRAD_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct LrModel {
    pub weights: Mat, // 1 x content vocab size
    pub bias: Mat,    // 1 x 1
}

/// Sparse bag-of-words: (content feature index, count).
fn featurize(vocab: &Vocabulary, tokens: &[String]) -> Vec<(usize, f64)> {
    let mut counts = std::collections::BTreeMap::new();
    for id in vocab.encode(tokens) {
        if id >= 2 {
            *counts.entry(id - 2).or_insert(0.0) += 1.0;
        }
    }
    counts.into_iter().collect()
}

impl LrModel {
    pub fn train(d: &Dataset, vocab: &Vocabulary, l2_penalty: f64) -> Result<LrModel> {
        if l2_penalty < 0.0 {
            return Err(Error::InvalidConfig("L2 penalty must be >= 0".into()));
        }
        let rows: Vec<(Vec<(usize, f64)>, f64)> = d
            .samples
            .iter()
            .map(|s| (featurize(vocab, &s.tokens), s.label.index() as f64))
            .collect();
        if rows.iter().all(|(_, y)| *y == 0.0) {
            return Err(Error::EmptyClass(Label::Positive));
        }
        if rows.iter().all(|(_, y)| *y == 1.0) {
            return Err(Error::EmptyClass(Label::Negative));
        }

        let content = vocab.content_len();
        let n = rows.len() as f64;
        // Lipschitz constant of the mean-loss gradient: sigmoid' <= 1/4,
        // features augmented with the constant-1 bias column.
        let max_sq = rows
            .iter()
            .map(|(x, _)| x.iter().map(|(_, v)| v * v).sum::<f64>() + 1.0)
            .fold(0.0f64, f64::max);
        let step = 1.0 / (l2_penalty + max_sq / 4.0);

        let mut weights = vec![0.0f64; content];
        let mut bias = 0.0f64;
        let mut grad_w = vec![0.0f64; content];

        for _ in 0..MAX_ITERATIONS {
            for (g, w) in grad_w.iter_mut().zip(&weights) {
                *g = l2_penalty * w;
            }
            let mut grad_b = 0.0;
            for (x, y) in &rows {
                let mut z = bias;
                for &(j, v) in x {
                    z += weights[j] * v;
                }
                let residual = (sigmoid(z) - y) / n;
                grad_b += residual;
                for &(j, v) in x {
                    grad_w[j] += residual * v;
                }
            }
            let norm = (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
            if norm < GRAD_TOLERANCE {
                break;
            }
            for (w, g) in weights.iter_mut().zip(&grad_w) {
                *w -= step * g;
            }
            bias -= step * grad_b;
        }

        Ok(LrModel {
            weights: Mat::from_vec(1, content, weights),
            bias: Mat::from_vec(1, 1, vec![bias]),
        })
    }

    /// [p(neg), p(pos)] for an encoded sequence.
    pub fn posterior(&self, vocab: &Vocabulary, tokens: &[String]) -> Vec<f64> {
        let mut z = self.bias.at(0, 0);
        for (j, v) in featurize(vocab, tokens) {
            z += self.weights.at(0, j) * v;
        }
        let p = sigmoid(z);
        vec![1.0 - p, p]
    }
}
