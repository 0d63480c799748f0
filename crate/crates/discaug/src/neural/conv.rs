//! 1D convolution over token embeddings with ReLU and global max pooling.
//!
//! One weight bank per filter width; a filter of width `w` sees the
//! concatenation of `w` consecutive embedding vectors. Sequences shorter
//! than the widest filter are right-padded with zero vectors.

use rand::Rng;

use super::linalg::{dot, Mat};
use super::lstm::live_prefix;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvBank {
    pub width: usize,
    pub weights: Mat, // n_filters x (width * dim)
    pub bias: Mat,    // 1 x n_filters
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub banks: Vec<ConvBank>,
    pub dim: usize,
}

impl ConvParams {
    pub fn zeros(widths: &[usize], n_filters: usize, dim: usize) -> ConvParams {
        ConvParams {
            banks: widths
                .iter()
                .map(|&width| ConvBank {
                    width,
                    weights: Mat::zeros(n_filters, width * dim),
                    bias: Mat::zeros(1, n_filters),
                })
                .collect(),
            dim,
        }
    }

    pub fn uniform(
        widths: &[usize],
        n_filters: usize,
        dim: usize,
        scale: f64,
        rng: &mut impl Rng,
    ) -> ConvParams {
        ConvParams {
            banks: widths
                .iter()
                .map(|&width| ConvBank {
                    width,
                    weights: Mat::uniform(n_filters, width * dim, -scale, scale, rng),
                    bias: Mat::zeros(1, n_filters),
                })
                .collect(),
            dim,
        }
    }

    /// Total feature count (filters summed over banks).
    pub fn feature_len(&self) -> usize {
        self.banks.iter().map(|b| b.weights.rows).sum()
    }

    pub fn max_width(&self) -> usize {
        self.banks.iter().map(|b| b.width).max().unwrap_or(1)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ConvTrace {
    /// Per feature: (window position of the max, pre-activation there).
    pub argmax: Vec<(usize, f64)>,
    pub features: Vec<f64>,
    pub live: usize,
}

fn window_dot(
    xs: &[&[f64]],
    live: usize,
    dim: usize,
    weights: &[f64],
    pos: usize,
    width: usize,
) -> f64 {
    let mut acc = 0.0;
    for r in 0..width {
        let idx = pos + r;
        if idx >= live {
            continue; // zero padding
        }
        acc += dot(&weights[r * dim..(r + 1) * dim], xs[idx]);
    }
    acc
}

/// ReLU conv features max-pooled over positions, concatenated across banks.
pub fn conv_maxpool(xs: &[&[f64]], p: &ConvParams, mask: &[bool]) -> Vec<f64> {
    conv_forward(xs, p, mask).features
}

pub(crate) fn conv_forward(xs: &[&[f64]], p: &ConvParams, mask: &[bool]) -> ConvTrace {
    assert!(!xs.is_empty(), "conv_maxpool: empty sequence");
    assert_eq!(xs.len(), mask.len());
    let live = live_prefix(mask);
    assert!(live >= 1, "conv_maxpool: all positions masked");
    // pad up to the widest filter so every bank has at least one window
    let padded_len = live.max(p.max_width());

    let mut features = Vec::with_capacity(p.feature_len());
    let mut argmax = Vec::with_capacity(p.feature_len());
    for bank in &p.banks {
        let n_windows = padded_len - bank.width + 1;
        for filter in 0..bank.weights.rows {
            let weights = bank.weights.row(filter);
            let bias = bank.bias.at(0, filter);
            let mut best_pos = 0usize;
            let mut best_pre = f64::NEG_INFINITY;
            for pos in 0..n_windows {
                let pre = bias + window_dot(xs, live, p.dim, weights, pos, bank.width);
                if pre > best_pre {
                    best_pre = pre;
                    best_pos = pos;
                }
            }
            features.push(best_pre.max(0.0));
            argmax.push((best_pos, best_pre));
        }
    }
    ConvTrace {
        argmax,
        features,
        live,
    }
}

/// Backprop through max pooling and the winning windows. Returns input
/// gradients per position; parameter gradients accumulate into `grads`.
pub(crate) fn conv_backward(
    xs: &[&[f64]],
    p: &ConvParams,
    trace: &ConvTrace,
    d_features: &[f64],
    grads: &mut ConvParams,
) -> Vec<Vec<f64>> {
    let mut dx: Vec<Vec<f64>> = xs.iter().map(|x| vec![0.0; x.len()]).collect();
    let mut feat = 0usize;
    for (bank, gbank) in p.banks.iter().zip(&mut grads.banks) {
        for filter in 0..bank.weights.rows {
            let (pos, pre) = trace.argmax[feat];
            let d = d_features[feat];
            feat += 1;
            // gradient flows only through the winning window, and only when
            // its pre-activation cleared the ReLU
            if d == 0.0 || pre <= 0.0 {
                continue;
            }
            *gbank.bias.at_mut(0, filter) += d;
            let weights = bank.weights.row(filter);
            let gw = gbank.weights.row_mut(filter);
            for r in 0..bank.width {
                let idx = pos + r;
                if idx >= trace.live {
                    continue;
                }
                let x = xs[idx];
                for k in 0..p.dim {
                    gw[r * p.dim + k] += d * x[k];
                    dx[idx][k] += d * weights[r * p.dim + k];
                }
            }
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    #[allow(clippy::needless_range_loop)] // spelled-out window arithmetic
    fn single_window_maxpool_is_identity() {
        // width 3 over T=3 leaves exactly one window
        let mut rng = rng_from_seed(1);
        let p = ConvParams::uniform(&[3], 2, 2, 0.5, &mut rng);
        let xs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let feats = conv_maxpool(&refs, &p, &[true; 3]);
        for (filter, f) in feats.iter().enumerate() {
            let mut pre = p.banks[0].bias.at(0, filter);
            for r in 0..3 {
                for k in 0..2 {
                    pre += p.banks[0].weights.row(filter)[r * 2 + k] * xs[r][k];
                }
            }
            assert!((f - pre.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_give_zero_features() {
        let p = ConvParams::zeros(&[3, 4, 5], 4, 3);
        let xs = vec![vec![1.0, -2.0, 0.5]; 6];
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let feats = conv_maxpool(&refs, &p, &[true; 6]);
        assert_eq!(feats, vec![0.0; 12]);
    }

    #[test]
    fn short_sequences_are_zero_padded() {
        let mut rng = rng_from_seed(2);
        let p = ConvParams::uniform(&[3, 4, 5], 2, 2, 0.5, &mut rng);
        let xs = [vec![0.7, -0.3]];
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let feats = conv_maxpool(&refs, &p, &[true]);
        assert_eq!(feats.len(), 6);
        assert!(feats.iter().all(|f| f.is_finite() && *f >= 0.0));
    }

    #[test]
    fn feature_count_matches_banks() {
        let p = ConvParams::zeros(&[3, 4, 5], 100, 8);
        assert_eq!(p.feature_len(), 300);
    }
}
