//! Independent oracles for the integration and acceptance suites.
//!
//! Everything here recomputes results with plain nested loops over `Vec`s
//! of `f64`, sharing no code with the library's forward/backward paths.

use discaug::corpus::Label;
use discaug::neural::attention::AttentionParams;
use discaug::neural::conv::ConvParams;
use discaug::neural::linalg::Mat;
use discaug::neural::lstm::LstmParams;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step computed element by element.
pub fn lstm_cell_oracle(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmParams,
) -> (Vec<f64>, Vec<f64>) {
    let hidden = p.hidden;
    let gate = |w: &Mat, u: &Mat, b: &Mat, k: usize| -> f64 {
        let mut acc = b.at(0, k);
        for (j, xv) in x.iter().enumerate() {
            acc += w.at(k, j) * xv;
        }
        for (j, hv) in h_prev.iter().enumerate() {
            acc += u.at(k, j) * hv;
        }
        acc
    };
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    for k in 0..hidden {
        let f = sigmoid(gate(&p.forget.w, &p.forget.u, &p.forget.b, k));
        let i = sigmoid(gate(&p.input.w, &p.input.u, &p.input.b, k));
        let o = sigmoid(gate(&p.output.w, &p.output.u, &p.output.b, k));
        let g = gate(&p.cell.w, &p.cell.u, &p.cell.b, k).tanh();
        c[k] = f * c_prev[k] + i * g;
        h[k] = o * c[k].tanh();
    }
    (h, c)
}

/// Bidirectional encoding: the cell oracle run forward and on the reversed
/// sequence, states concatenated per position.
pub fn bilstm_oracle(xs: &[Vec<f64>], fwd: &LstmParams, bwd: &LstmParams) -> Vec<Vec<f64>> {
    let t_len = xs.len();
    let mut fwd_states = Vec::with_capacity(t_len);
    let mut h = vec![0.0; fwd.hidden];
    let mut c = vec![0.0; fwd.hidden];
    for x in xs {
        let (nh, nc) = lstm_cell_oracle(x, &h, &c, fwd);
        fwd_states.push(nh.clone());
        h = nh;
        c = nc;
    }
    let mut bwd_states = vec![Vec::new(); t_len];
    let mut h = vec![0.0; bwd.hidden];
    let mut c = vec![0.0; bwd.hidden];
    for t in (0..t_len).rev() {
        let (nh, nc) = lstm_cell_oracle(&xs[t], &h, &c, bwd);
        bwd_states[t] = nh.clone();
        h = nh;
        c = nc;
    }
    (0..t_len)
        .map(|t| {
            let mut v = fwd_states[t].clone();
            v.extend_from_slice(&bwd_states[t]);
            v
        })
        .collect()
}

/// Attention pooling recomputed directly: score by summed tanh projection,
/// exp-normalize, weighted sum.
pub fn attention_oracle(hs: &[Vec<f64>], p: &AttentionParams) -> (Vec<f64>, Vec<f64>) {
    let attn_dim = p.bias.cols;
    let scores: Vec<f64> = hs
        .iter()
        .map(|h| {
            let mut score = 0.0;
            for k in 0..attn_dim {
                let mut q = p.bias.at(0, k);
                for (j, hv) in h.iter().enumerate() {
                    q += p.hidden_proj.at(k, j) * hv;
                }
                for j in 0..attn_dim {
                    q += p.context_proj.at(k, j) * p.context.at(0, j);
                }
                score += q.tanh();
            }
            score
        })
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    let weights: Vec<f64> = exps.iter().map(|e| e / denom).collect();
    let width = hs[0].len();
    let mut pooled = vec![0.0; width];
    for (w, h) in weights.iter().zip(hs) {
        for (p, hv) in pooled.iter_mut().zip(h) {
            *p += w * hv;
        }
    }
    (pooled, weights)
}

/// Convolution with ReLU and global max pooling, nested loops only.
#[allow(clippy::needless_range_loop)] // index loops are the point of the oracle
pub fn conv_oracle(xs: &[Vec<f64>], p: &ConvParams) -> Vec<f64> {
    let dim = p.dim;
    let max_width = p.banks.iter().map(|b| b.width).max().unwrap();
    let padded = xs.len().max(max_width);
    let mut features = Vec::new();
    for bank in &p.banks {
        for filter in 0..bank.weights.rows {
            let mut best = f64::NEG_INFINITY;
            for pos in 0..=(padded - bank.width) {
                let mut pre = bank.bias.at(0, filter);
                for r in 0..bank.width {
                    if pos + r >= xs.len() {
                        continue; // zero padding rows
                    }
                    for k in 0..dim {
                        pre += bank.weights.at(filter, r * dim + k) * xs[pos + r][k];
                    }
                }
                if pre > best {
                    best = pre;
                }
            }
            features.push(best.max(0.0));
        }
    }
    features
}

/// Brute-force multinomial Bayes with Laplace smoothing over a tiny corpus:
/// direct products of counted probabilities, no logs.
pub fn nb_posterior_oracle(
    docs: &[(Vec<&str>, Label)],
    vocab: &[&str],
    alpha: f64,
    query: &[&str],
) -> Vec<f64> {
    let mut joint = [0.0f64; 2];
    for (class, slot) in joint.iter_mut().enumerate() {
        let in_class: Vec<&(Vec<&str>, Label)> =
            docs.iter().filter(|(_, l)| l.index() == class).collect();
        let prior = in_class.len() as f64 / docs.len() as f64;
        let total: usize = in_class
            .iter()
            .map(|(tokens, _)| tokens.iter().filter(|t| vocab.contains(t)).count())
            .sum();
        let mut product = prior;
        for q in query {
            if !vocab.contains(q) {
                continue;
            }
            let count: usize = in_class
                .iter()
                .map(|(tokens, _)| tokens.iter().filter(|t| t == &q).count())
                .sum();
            product *= (count as f64 + alpha) / (total as f64 + alpha * vocab.len() as f64);
        }
        *slot = product;
    }
    let z = joint[0] + joint[1];
    vec![joint[0] / z, joint[1] / z]
}

/// Lexicon judgment with tail dominance: if an infix transitional marker is
/// present and the tokens after it carry lexicon words, judge by those;
/// otherwise judge by the net polarity of the whole sequence. `None` means
/// no sentiment either way.
pub fn lexicon_judgment(tokens: &[String]) -> Option<Label> {
    use discaug::synth::{NEGATIVE_LEXICON, POSITIVE_LEXICON};
    let markers = ["but", "although", "though", "however", "yet"];
    let net = |window: &[String]| -> i64 {
        let mut score = 0i64;
        for t in window {
            if POSITIVE_LEXICON.contains(&t.as_str()) {
                score += 1;
            } else if NEGATIVE_LEXICON.contains(&t.as_str()) {
                score -= 1;
            }
        }
        score
    };
    let infix = tokens
        .iter()
        .enumerate()
        .position(|(i, t)| i >= 1 && i + 1 < tokens.len() && markers.contains(&t.as_str()));
    let score = match infix {
        Some(at) if net(&tokens[at + 1..]) != 0 => net(&tokens[at + 1..]),
        _ => net(tokens),
    };
    match score.signum() {
        1 => Some(Label::Positive),
        -1 => Some(Label::Negative),
        _ => None,
    }
}

/// Fraction of candidates whose proposed label the lexicon agrees with.
pub fn label_purity(cands: &[discaug::segmenter::Candidate]) -> f64 {
    if cands.is_empty() {
        return 0.0;
    }
    let agree = cands
        .iter()
        .filter(|c| lexicon_judgment(&c.tokens) == Some(c.proposed_label))
        .count();
    agree as f64 / cands.len() as f64
}
