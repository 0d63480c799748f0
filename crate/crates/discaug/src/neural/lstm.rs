//! LSTM cell and unrolled sequence passes.
//!
//! Gate layout per step, with `σ` the logistic function and `⊙` the
//! elementwise product:
//!
//! ```text
//! forget = σ(Wf x + Uf h_prev + bf)
//! input  = σ(Wi x + Ui h_prev + bi)
//! output = σ(Wo x + Uo h_prev + bo)
//! cand   = tanh(Wc x + Uc h_prev + bc)
//! cell   = forget ⊙ cell_prev + input ⊙ cand
//! hidden = output ⊙ tanh(cell)
//! ```

use rand::Rng;

use super::linalg::{sigmoid, Mat};

/// One gate's parameters: input projection, recurrent projection, bias.
/// The bias is a 1xH matrix so all parameters share one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub w: Mat,
    pub u: Mat,
    pub b: Mat,
}

impl Gate {
    fn zeros(hidden: usize, input_dim: usize) -> Gate {
        Gate {
            w: Mat::zeros(hidden, input_dim),
            u: Mat::zeros(hidden, hidden),
            b: Mat::zeros(1, hidden),
        }
    }

    fn uniform(hidden: usize, input_dim: usize, scale: f64, rng: &mut impl Rng) -> Gate {
        Gate {
            w: Mat::uniform(hidden, input_dim, -scale, scale, rng),
            u: Mat::uniform(hidden, hidden, -scale, scale, rng),
            b: Mat::zeros(1, hidden),
        }
    }

    /// pre-activation = W x + U h_prev + b
    fn preact(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let hidden = self.b.cols;
        let mut a = vec![0.0; hidden];
        a.copy_from_slice(self.b.row(0));
        self.w.matvec_accum(x, &mut a);
        self.u.matvec_accum(h_prev, &mut a);
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub forget: Gate,
    pub input: Gate,
    pub output: Gate,
    pub cell: Gate,
    pub hidden: usize,
    pub input_dim: usize,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input_dim: usize) -> LstmParams {
        LstmParams {
            forget: Gate::zeros(hidden, input_dim),
            input: Gate::zeros(hidden, input_dim),
            output: Gate::zeros(hidden, input_dim),
            cell: Gate::zeros(hidden, input_dim),
            hidden,
            input_dim,
        }
    }

    /// Weight matrices uniform in [-scale, scale], biases zero.
    pub fn uniform(hidden: usize, input_dim: usize, scale: f64, rng: &mut impl Rng) -> LstmParams {
        LstmParams {
            forget: Gate::uniform(hidden, input_dim, scale, rng),
            input: Gate::uniform(hidden, input_dim, scale, rng),
            output: Gate::uniform(hidden, input_dim, scale, rng),
            cell: Gate::uniform(hidden, input_dim, scale, rng),
            hidden,
            input_dim,
        }
    }

    pub fn gates(&self) -> [(&'static str, &Gate); 4] {
        [
            ("forget", &self.forget),
            ("input", &self.input),
            ("output", &self.output),
            ("cell", &self.cell),
        ]
    }

    pub fn gates_mut(&mut self) -> [(&'static str, &mut Gate); 4] {
        [
            ("forget", &mut self.forget),
            ("input", &mut self.input),
            ("output", &mut self.output),
            ("cell", &mut self.cell),
        ]
    }
}

/// Single LSTM step. Returns `(hidden, cell)`.
pub fn lstm_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmParams,
) -> (Vec<f64>, Vec<f64>) {
    let step = lstm_step(x, h_prev, c_prev, p);
    (step.h, step.c)
}

/// Everything one backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub(crate) struct StepTrace {
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>, // tanh candidate
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn lstm_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], p: &LstmParams) -> StepTrace {
    assert_eq!(x.len(), p.input_dim, "input dim mismatch");
    assert_eq!(h_prev.len(), p.hidden, "hidden dim mismatch");
    assert_eq!(c_prev.len(), p.hidden, "cell dim mismatch");
    debug_assert!(x.iter().all(|v| v.is_finite()), "non-finite lstm input");

    let f: Vec<f64> = p
        .forget
        .preact(x, h_prev)
        .iter()
        .map(|&a| sigmoid(a))
        .collect();
    let i: Vec<f64> = p
        .input
        .preact(x, h_prev)
        .iter()
        .map(|&a| sigmoid(a))
        .collect();
    let o: Vec<f64> = p
        .output
        .preact(x, h_prev)
        .iter()
        .map(|&a| sigmoid(a))
        .collect();
    let g: Vec<f64> = p.cell.preact(x, h_prev).iter().map(|&a| a.tanh()).collect();
    let c: Vec<f64> = (0..p.hidden)
        .map(|k| f[k] * c_prev[k] + i[k] * g[k])
        .collect();
    let h: Vec<f64> = (0..p.hidden).map(|k| o[k] * c[k].tanh()).collect();
    StepTrace { f, i, o, g, c, h }
}

/// Unrolled forward over a sequence, zero initial state.
pub(crate) fn lstm_forward(xs: &[&[f64]], p: &LstmParams) -> Vec<StepTrace> {
    let zero_h = vec![0.0; p.hidden];
    let zero_c = vec![0.0; p.hidden];
    let mut steps: Vec<StepTrace> = Vec::with_capacity(xs.len());
    for (t, x) in xs.iter().enumerate() {
        let (h_prev, c_prev) = if t == 0 {
            (zero_h.as_slice(), zero_c.as_slice())
        } else {
            (steps[t - 1].h.as_slice(), steps[t - 1].c.as_slice())
        };
        steps.push(lstm_step(x, h_prev, c_prev, p));
    }
    steps
}

/// Backprop through the unrolled sequence. `dh` holds the loss gradient
/// flowing into each step's hidden output from downstream consumers.
/// Returns the input gradients; parameter gradients accumulate into `grads`.
pub(crate) fn lstm_backward(
    xs: &[&[f64]],
    p: &LstmParams,
    steps: &[StepTrace],
    dh: &[Vec<f64>],
    grads: &mut LstmParams,
) -> Vec<Vec<f64>> {
    let hidden = p.hidden;
    let mut dx: Vec<Vec<f64>> = xs.iter().map(|x| vec![0.0; x.len()]).collect();
    let mut dh_carry = vec![0.0; hidden];
    let mut dc_carry = vec![0.0; hidden];
    let zero = vec![0.0; hidden];

    for t in (0..xs.len()).rev() {
        let step = &steps[t];
        let (h_prev, c_prev) = if t == 0 {
            (zero.as_slice(), zero.as_slice())
        } else {
            (steps[t - 1].h.as_slice(), steps[t - 1].c.as_slice())
        };

        let mut dh_t = dh[t].clone();
        for (v, carry) in dh_t.iter_mut().zip(&dh_carry) {
            *v += carry;
        }

        // h = o ⊙ tanh(c)
        let tanh_c: Vec<f64> = step.c.iter().map(|v| v.tanh()).collect();
        let d_o: Vec<f64> = (0..hidden).map(|k| dh_t[k] * tanh_c[k]).collect();
        let mut dc_t: Vec<f64> = (0..hidden)
            .map(|k| dh_t[k] * step.o[k] * (1.0 - tanh_c[k] * tanh_c[k]))
            .collect();
        for (v, carry) in dc_t.iter_mut().zip(&dc_carry) {
            *v += carry;
        }

        // c = f ⊙ c_prev + i ⊙ g
        let d_f: Vec<f64> = (0..hidden).map(|k| dc_t[k] * c_prev[k]).collect();
        let d_i: Vec<f64> = (0..hidden).map(|k| dc_t[k] * step.g[k]).collect();
        let d_g: Vec<f64> = (0..hidden).map(|k| dc_t[k] * step.i[k]).collect();
        for k in 0..hidden {
            dc_carry[k] = dc_t[k] * step.f[k];
        }

        // through the activations to the pre-activations
        let da_f: Vec<f64> = (0..hidden)
            .map(|k| d_f[k] * step.f[k] * (1.0 - step.f[k]))
            .collect();
        let da_i: Vec<f64> = (0..hidden)
            .map(|k| d_i[k] * step.i[k] * (1.0 - step.i[k]))
            .collect();
        let da_o: Vec<f64> = (0..hidden)
            .map(|k| d_o[k] * step.o[k] * (1.0 - step.o[k]))
            .collect();
        let da_g: Vec<f64> = (0..hidden)
            .map(|k| d_g[k] * (1.0 - step.g[k] * step.g[k]))
            .collect();

        dh_carry.fill(0.0);
        let x = xs[t];
        for (da, gate, ggrad) in [
            (&da_f, &p.forget, &mut grads.forget),
            (&da_i, &p.input, &mut grads.input),
            (&da_o, &p.output, &mut grads.output),
            (&da_g, &p.cell, &mut grads.cell),
        ] {
            ggrad.w.add_outer(da, x);
            ggrad.u.add_outer(da, h_prev);
            for (b, d) in ggrad.b.row_mut(0).iter_mut().zip(da) {
                *b += d;
            }
            gate.w.tr_matvec_accum(da, &mut dx[t]);
            gate.u.tr_matvec_accum(da, &mut dh_carry);
        }
    }
    dx
}

/// Concatenate forward and reversed-pass hidden states per position.
///
/// `mask` marks real tokens; it must be a contiguous prefix of `true`
/// (right padding). The recurrences run over the unmasked prefix only, so
/// results do not depend on padding length. Masked positions yield zero
/// vectors, which the attention layer excludes anyway.
pub fn bilstm_encode(
    xs: &[&[f64]],
    fwd: &LstmParams,
    bwd: &LstmParams,
    mask: &[bool],
) -> Vec<Vec<f64>> {
    assert!(!xs.is_empty(), "bilstm_encode: empty sequence");
    assert_eq!(xs.len(), mask.len());
    let live = live_prefix(mask);
    assert!(live >= 1, "bilstm_encode: all positions masked");

    let fwd_steps = lstm_forward(&xs[..live], fwd);
    let reversed: Vec<&[f64]> = xs[..live].iter().rev().cloned().collect();
    let bwd_steps = lstm_forward(&reversed, bwd);

    let mut out = vec![vec![0.0; fwd.hidden + bwd.hidden]; xs.len()];
    for t in 0..live {
        let (left, right) = out[t].split_at_mut(fwd.hidden);
        left.copy_from_slice(&fwd_steps[t].h);
        // bwd step (live-1-t) consumed input position t
        right.copy_from_slice(&bwd_steps[live - 1 - t].h);
    }
    out
}

/// Length of the leading `true` run; also asserts the mask is right-padded.
pub(crate) fn live_prefix(mask: &[bool]) -> usize {
    let live = mask.iter().take_while(|&&m| m).count();
    assert!(
        mask[live..].iter().all(|&m| !m),
        "mask must be a true-prefix (right padding)"
    );
    live
}
