//! Finite-difference verification of the analytic gradients.

use crate::corpus::Label;
use crate::neural::net::{AttnBiLstmNet, CnnNet, ParamMats};

/// Central-difference gradient of `loss` at `params`, one component at a
/// time. `loss` must be a pure function of the parameter vector.
pub fn numeric_gradient<F>(loss: F, params: &[f64], delta: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut work = params.to_vec();
    let mut grad = vec![0.0; params.len()];
    for k in 0..params.len() {
        let original = work[k];
        work[k] = original + delta;
        let up = loss(&work);
        work[k] = original - delta;
        let down = loss(&work);
        work[k] = original;
        grad[k] = (up - down) / (2.0 * delta);
    }
    grad
}

/// Max over components of |a - n| / max(1e-8, |a| + |n|).
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / (a.abs() + n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Compare the attention-BiLSTM network's analytic gradient against central
/// differences on one labeled sequence. Returns the max relative error.
pub fn grad_check_bilstm(net: &AttnBiLstmNet, ids: &[usize], label: Label, delta: f64) -> f64 {
    let (_, grads) = net.backward(ids, label);
    let analytic = grads.to_flat();
    let template = net.clone();
    let numeric = numeric_gradient(
        |flat| {
            let mut candidate = template.clone();
            candidate.set_from_flat(flat);
            candidate.loss(ids, label)
        },
        &net.to_flat(),
        delta,
    );
    max_relative_error(&analytic, &numeric)
}

/// Same check for the CNN network (no dropout during the check).
pub fn grad_check_cnn(net: &CnnNet, ids: &[usize], label: Label, delta: f64) -> f64 {
    let (_, grads) = net.backward(ids, label, None);
    let analytic = grads.to_flat();
    let template = net.clone();
    let numeric = numeric_gradient(
        |flat| {
            let mut candidate = template.clone();
            candidate.set_from_flat(flat);
            candidate.loss(ids, label)
        },
        &net.to_flat(),
        delta,
    );
    max_relative_error(&analytic, &numeric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::text::EmbeddingTable;
    use rand::Rng;

    /// Redraw all parameters uniform in [-0.5, 0.5]. The training-time init
    /// scale leaves some gradient components near the f64 noise floor of
    /// the finite-difference probe; the check needs signal everywhere.
    fn randomize<N: ParamMats>(net: &mut N, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let flat: Vec<f64> = (0..net.flat_len())
            .map(|_| rng.gen_range(-0.5..0.5))
            .collect();
        net.set_from_flat(&flat);
    }

    #[test]
    fn bilstm_gradients_match_finite_differences() {
        let table = EmbeddingTable::random(8, 3, 10);
        let mut net = AttnBiLstmNet::new(&table, 2, 2, 11);
        randomize(&mut net, 20);
        let err = grad_check_bilstm(&net, &[2, 5, 3, 7], Label::Positive, 1e-5);
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn cnn_gradients_match_finite_differences() {
        let table = EmbeddingTable::random(8, 4, 12);
        let mut net = CnnNet::new(&table, &[2, 3], 3, 13);
        randomize(&mut net, 21);
        let err = grad_check_cnn(&net, &[2, 5, 3, 7, 6], Label::Negative, 1e-5);
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let table = EmbeddingTable::random(8, 3, 10);
        let mut net = AttnBiLstmNet::new(&table, 2, 2, 11);
        randomize(&mut net, 22);
        let ids = [2, 5, 3, 7];
        let (_, grads) = net.backward(&ids, Label::Positive);
        let mut analytic = grads.to_flat();
        // double the forward-direction forget-gate input weights' gradient
        let layout = grads.flat_layout();
        let (_, start, len) = layout
            .iter()
            .find(|(name, _, _)| name == "fwd.forget.w")
            .cloned()
            .unwrap();
        for v in &mut analytic[start..start + len] {
            *v *= 2.0;
        }
        let template = net.clone();
        let numeric = numeric_gradient(
            |flat| {
                let mut candidate = template.clone();
                candidate.set_from_flat(flat);
                candidate.loss(&ids, Label::Positive)
            },
            &net.to_flat(),
            1e-5,
        );
        let err = max_relative_error(&analytic, &numeric);
        assert!(err > 1e-1, "checker failed to notice corruption: {err}");
    }

    #[test]
    fn zero_parameter_model_still_checks_out() {
        let table = EmbeddingTable::random(4, 2, 1);
        let mut net = AttnBiLstmNet::new(&table, 2, 2, 2);
        let zeros = vec![0.0; net.flat_len()];
        net.set_from_flat(&zeros);
        let err = grad_check_bilstm(&net, &[2, 3], Label::Negative, 1e-5);
        assert!(err.is_finite());
        assert!(err < 1e-4, "max relative error {err}");
    }
}
