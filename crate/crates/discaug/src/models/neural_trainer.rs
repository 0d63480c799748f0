//! Minibatch Adam training for the CNN and attention-BiLSTM classifiers.
//!
//! Per-sample gradients inside a batch are computed in parallel in fixed
//! chunks, then reduced in chunk order, so the update is bitwise identical
//! across thread counts and across the parallel/sequential builds.

use rand::seq::SliceRandom;

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neural::net::ParamMats;
use crate::neural::{AdamConfig, AdamState, AttnBiLstmNet, CnnNet};
use crate::par::map_ordered;
use crate::rng::{derive_seed, rng_from_seed};
use crate::text::{EmbeddingTable, Vocabulary};

use super::TrainConfig;

/// Gradient global-norm ceiling.
pub const MAX_GRAD_NORM: f64 = 5.0;

/// Number of parallel gradient chunks per batch. Fixed so the reduction
/// order never depends on the machine.
const GRAD_CHUNKS: usize = 8;

pub(super) struct Encoded {
    pub ids: Vec<Vec<usize>>,
    pub labels: Vec<Label>,
}

pub(super) fn encode_dataset(d: &Dataset, vocab: &Vocabulary) -> Encoded {
    Encoded {
        ids: d.samples.iter().map(|s| vocab.encode(&s.tokens)).collect(),
        labels: d.samples.iter().map(|s| s.label).collect(),
    }
}

pub(super) fn init_embedding(vocab: &Vocabulary, cfg: &TrainConfig) -> Result<EmbeddingTable> {
    let seed = derive_seed(cfg.seed, &["embedding"]);
    match &cfg.embeddings_path {
        Some(path) => crate::text::load_embeddings(path, vocab, cfg.embedding_dim, seed),
        None => Ok(EmbeddingTable::random(vocab.len(), cfg.embedding_dim, seed)),
    }
}

/// One trainable network: forward loss and per-sample gradients.
pub(super) trait Trainable: ParamMats + Clone + Send + Sync {
    /// Gradient of one labeled sample. `mask_seed` feeds dropout when the
    /// network uses it.
    fn sample_grad(&self, ids: &[usize], label: Label, dropout: f64, mask_seed: u64)
        -> (f64, Self);
}

impl Trainable for AttnBiLstmNet {
    fn sample_grad(
        &self,
        ids: &[usize],
        label: Label,
        _dropout: f64,
        _mask_seed: u64,
    ) -> (f64, AttnBiLstmNet) {
        self.backward(ids, label)
    }
}

impl Trainable for CnnNet {
    fn sample_grad(
        &self,
        ids: &[usize],
        label: Label,
        dropout: f64,
        mask_seed: u64,
    ) -> (f64, CnnNet) {
        if dropout > 0.0 {
            let mut rng = rng_from_seed(mask_seed);
            let mask = crate::neural::dropout_mask(self.conv.feature_len(), dropout, &mut rng);
            self.backward(ids, label, Some(&mask))
        } else {
            self.backward(ids, label, None)
        }
    }
}

pub(super) fn train_net<N: Trainable>(mut net: N, data: &Encoded, cfg: &TrainConfig) -> Result<N> {
    let mut adam = AdamState::new(
        net.flat_len(),
        AdamConfig::with_learning_rate(cfg.learning_rate),
    );
    let mut order: Vec<usize> = (0..data.ids.len()).collect();
    let mut shuffle_rng = rng_from_seed(derive_seed(cfg.seed, &["shuffle"]));

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for (batch_no, batch) in order.chunks(cfg.batch_size.max(1)).enumerate() {
            let mask_base = derive_seed(
                cfg.seed,
                &["dropout", &epoch.to_string(), &batch_no.to_string()],
            );
            let chunk_len = batch.len().div_ceil(GRAD_CHUNKS);
            let chunks: Vec<&[usize]> = batch.chunks(chunk_len).collect();
            let partials = map_ordered(&chunks, |chunk| {
                let mut grads: Option<N> = None;
                let mut loss_sum = 0.0;
                for &idx in chunk.iter() {
                    let (loss, g) =
                        net.sample_grad(&data.ids[idx], data.labels[idx], cfg.dropout, {
                            derive_seed(mask_base, &[&idx.to_string()])
                        });
                    loss_sum += loss;
                    match &mut grads {
                        Some(acc) => acc.add_assign(&g),
                        None => grads = Some(g),
                    }
                }
                (loss_sum, grads)
            });

            let mut total_loss = 0.0;
            let mut grads: Option<N> = None;
            for (loss, partial) in partials {
                total_loss += loss;
                if let Some(p) = partial {
                    match &mut grads {
                        Some(acc) => acc.add_assign(&p),
                        None => grads = Some(p),
                    }
                }
            }
            let mut grads = match grads {
                Some(g) => g,
                None => continue,
            };
            if !total_loss.is_finite() {
                return Err(Error::Train(format!(
                    "non-finite loss at epoch {epoch}, batch {batch_no}"
                )));
            }
            grads.scale(1.0 / batch.len() as f64);

            let norm = grads.l2_norm();
            if !norm.is_finite() {
                return Err(Error::Train(format!(
                    "non-finite gradient at epoch {epoch}, batch {batch_no}"
                )));
            }
            if norm > MAX_GRAD_NORM {
                grads.scale(MAX_GRAD_NORM / norm);
            }

            let mut flat = net.to_flat();
            adam.step(&mut flat, &grads.to_flat())?;
            net.set_from_flat(&flat);
        }
    }
    if !net.is_finite() {
        return Err(Error::Train("non-finite parameters after training".into()));
    }
    Ok(net)
}
