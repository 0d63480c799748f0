//! Data augmentation for imbalanced binary sentiment classification.
//!
//! Compound sentences built around a transitional discourse marker ("the
//! actress is beautiful, but the plot is terrible") carry two discourses of
//! opposite polarity. This crate harvests such sentences, derives new labeled
//! samples from them (swap the discourses, crop the head, crop the tail),
//! filters the derived samples with a pretrained attention-BiLSTM validator,
//! and measures the downstream effect on a suite of classifiers trained under
//! controlled class-imbalance ratios.
//!
//! The crate is organized around the stages of that pipeline:
//!
//! * [`corpus`] loads labeled datasets, performs stratified splits, imposes a
//!   target imbalanced-ratio, and rebalances by random oversampling.
//! * [`text`] tokenizes, builds vocabularies, and loads word vectors.
//! * [`segmenter`] detects markers and generates labeled candidates.
//! * [`neural`] holds the from-scratch differentiable primitives (LSTM cell,
//!   bidirectional encoding, attention pooling, convolution, Adam) plus a
//!   finite-difference gradient checker.
//! * [`models`] exposes Naive Bayes, logistic regression, CNN, and
//!   attention-BiLSTM classifiers behind one train/predict/evaluate contract.
//! * [`pipeline`] runs the end-to-end augmentation and the experiment grids,
//!   writing deterministic CSV reports.
//!
//! Data-parallel inner loops (candidate harvesting, batch gradients, grid
//! cells) run on rayon when the default `parallel` feature is enabled and
//! fall back to equivalent sequential loops when it is not. Both paths
//! produce bitwise-identical results for equal seeds.

pub mod checkpoint;
pub mod corpus;
pub mod error;
pub mod models;
pub mod neural;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod segmenter;
pub mod synth;
pub mod text;

pub use error::{Error, ErrorKind, Result};
