//! Parallel-vs-sequential benchmarks for the data-parallel inner loops:
//! candidate harvesting, batch evaluation, validator filtering, and
//! per-sample gradient maps.
//!
//! The `parallel`-path groups go through the library (rayon under the
//! default feature); the `sequential` groups run the same work through
//! plain iterator maps. Building with `--no-default-features` makes the
//! library path sequential too, which is the honest baseline comparison.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use discaug::corpus::{self, SplitSpec};
use discaug::models::{self, ClassifierKind, TrainConfig};
use discaug::neural::net::ParamMats;
use discaug::neural::{AttnBiLstmNet, CnnNet};
use discaug::par::{map_ordered, map_ordered_seq};
use discaug::pipeline::validate_filter;
use discaug::segmenter::{harvest, MarkerSet};
use discaug::synth::{generate, SynthConfig};
use discaug::text::{EmbeddingTable, Vocabulary};

fn bench_corpus() -> discaug::corpus::Dataset {
    generate(
        "bench",
        &SynthConfig {
            samples_per_class: 1500,
            compound_fraction: 0.3,
            lexicon_multiplier: 4,
            ..SynthConfig::default()
        },
    )
}

fn bench_harvest(c: &mut Criterion) {
    let d = bench_corpus();
    let markers = MarkerSet::transitional();
    let mut group = c.benchmark_group("harvest");
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(harvest(black_box(&d), &markers)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let per_sample = map_ordered_seq(&d.samples, |s| {
                discaug::segmenter::split_discourse(s, &markers)
                    .map(|sp| discaug::segmenter::generate_candidates(&sp))
                    .unwrap_or_default()
            });
            black_box(per_sample.into_iter().flatten().collect::<Vec<_>>())
        })
    });
    group.finish();
}

fn bench_evaluate(c: &mut Criterion) {
    let d = bench_corpus();
    let (train, test) = corpus::split(&d, &SplitSpec::new(0.8, 1).unwrap()).unwrap();
    let model = models::train(&train, &TrainConfig::new(ClassifierKind::NaiveBayes, 1)).unwrap();
    let mut group = c.benchmark_group("evaluate_nb");
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(model.evaluate(black_box(&test)).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let hits = map_ordered_seq(&test.samples, |s| {
                model.predict(s).map(|(l, _)| l == s.label).unwrap()
            });
            black_box(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
        })
    });
    group.finish();
}

fn bench_validate_filter(c: &mut Criterion) {
    let d = bench_corpus();
    let markers = MarkerSet::transitional();
    let candidates = harvest(&d, &markers);
    let validator = models::train(
        &d,
        &TrainConfig {
            embedding_dim: 16,
            hidden: 8,
            attention_dim: 8,
            epochs: 1,
            batch_size: 32,
            ..TrainConfig::validator(5)
        },
    )
    .unwrap();
    let mut group = c.benchmark_group("validate_filter");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(validate_filter(black_box(&candidates), &validator, 0.0)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let kept: Vec<_> = candidates
                .iter()
                .filter(|cand| {
                    let (label, _) = validator.predict_tokens(&cand.tokens).unwrap();
                    label == cand.proposed_label
                })
                .cloned()
                .collect();
            black_box(kept)
        })
    });
    group.finish();
}

/// One minibatch of per-sample gradients, the inner loop of neural
/// training, reduced in fixed order either way.
fn bench_batch_gradients(c: &mut Criterion) {
    let d = bench_corpus();
    let vocab = Vocabulary::build(&d, 1).unwrap();
    let table = EmbeddingTable::random(vocab.len(), 32, 3);
    let rnn = AttnBiLstmNet::new(&table, 16, 8, 4);
    let cnn = CnnNet::new(&table, &[3, 4, 5], 32, 4);
    let batch: Vec<(Vec<usize>, discaug::corpus::Label)> = d.samples[..64]
        .iter()
        .map(|s| (vocab.encode(&s.tokens), s.label))
        .collect();

    let mut group = c.benchmark_group("batch_gradients_rnn");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || rnn.clone(),
            |net| {
                let grads = map_ordered(&batch, |(ids, label)| net.backward(ids, *label).1);
                let mut total = net.zeros_like();
                for g in &grads {
                    total.add_assign(g);
                }
                black_box(total)
            },
            BatchSize::LargeInput,
        )
    });
    group.bench_function("sequential", |b| {
        b.iter_batched(
            || rnn.clone(),
            |net| {
                let grads = map_ordered_seq(&batch, |(ids, label)| net.backward(ids, *label).1);
                let mut total = net.zeros_like();
                for g in &grads {
                    total.add_assign(g);
                }
                black_box(total)
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();

    let mut group = c.benchmark_group("batch_gradients_cnn");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || cnn.clone(),
            |net| {
                let grads = map_ordered(&batch, |(ids, label)| net.backward(ids, *label, None).1);
                let mut total = net.zeros_like();
                for g in &grads {
                    total.add_assign(g);
                }
                black_box(total)
            },
            BatchSize::LargeInput,
        )
    });
    group.bench_function("sequential", |b| {
        b.iter_batched(
            || cnn.clone(),
            |net| {
                let grads =
                    map_ordered_seq(&batch, |(ids, label)| net.backward(ids, *label, None).1);
                let mut total = net.zeros_like();
                for g in &grads {
                    total.add_assign(g);
                }
                black_box(total)
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_harvest,
    bench_evaluate,
    bench_validate_filter,
    bench_batch_gradients
);
criterion_main!(benches);
